#include "freebnd/extension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "freebnd/operator.hpp"

namespace freebnd {
namespace {

constexpr int kOrder = 20;

double poisson_raw(double s, double x, double y) { return std::pow(y, 2.0 * s) * std::pow(x * x + y * y, -0.5 - s); }

void require_1d(const GridSpec& g) {
  if (g.dim != 1) throw Error(ErrorCode::InvalidArgument, "the Poisson extension is implemented for dim = 1");
}

// int_0^h (1 - xi/h) P(c - xi, y) dxi, in sub-panels no wider than y / 2.
double half_hat(double s, double c, double y, double h) {
  const GaussRule& gl = gauss_legendre(kOrder);
  const int nsub = std::clamp(static_cast<int>(std::ceil(2.0 * h / y)), 1, 256);
  const double w = h / nsub;
  double acc = 0.0;
  for (int p = 0; p < nsub; ++p) {
    const double a = p * w;
    for (int k = 0; k < kOrder; ++k) {
      const double xi = a + 0.5 * w * (gl.x[k] + 1.0);
      acc += 0.5 * w * gl.w[k] * (1.0 - xi / h) * poisson_raw(s, c - xi, y);
    }
  }
  return acc;
}

// int_{edge}^{+-inf} ext(x') P(x - x', y) dx' with sign = -1 (left ray) or +1.
double ray_integral(const Exterior& ext, double s, double x, double y, double edge, double sign) {
  if (ext.kind() == Exterior::Kind::zero || ext.form().is_zero()) return 0.0;
  if (ext.kind() == Exterior::Kind::none) {
    throw Error(ErrorCode::NonIntegrableTail, "the Poisson extension needs an exterior policy");
  }
  const ClosedForm& f = ext.form();
  const auto g = [&](double t) {
    const double xp = edge + sign * t;
    return f({xp, 0.0}) * poisson_raw(s, x - xp, y);
  };
  std::vector<double> breaks;
  f.ray_breakpoints({edge, 0.0}, {sign, 0.0}, breaks);
  std::sort(breaks.begin(), breaks.end());
  double acc = 0.0, err = 0.0, a = 0.0;
  try {
    for (double b : breaks) {
      if (!(b > a)) continue;
      double e = 0.0;
      acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, a, b, 15, 1e-12, &e);
      err += e;
      a = b;
    }
    boost::math::quadrature::exp_sinh<double> es;
    double e = 0.0, l1 = 0.0;
    acc += es.integrate([&](double t) { return g(a + t); }, 1e-12, &e, &l1);
    err += e;
  } catch (const std::exception& ex) {
    throw Error(ErrorCode::NonIntegrableTail, std::string("exterior tail integral failed: ") + ex.what());
  }
  if (!std::isfinite(acc) || err > 1e-6 * std::max(1.0, std::abs(acc))) {
    throw Error(ErrorCode::NonIntegrableTail, "exterior tail integral did not converge");
  }
  return acc;
}

double ring_value(const GridFunction& u, double x) {
  const Exterior& ext = u.exterior();
  if (ext.kind() == Exterior::Kind::zero) return 0.0;
  if (ext.kind() == Exterior::Kind::none) {
    throw Error(ErrorCode::NonIntegrableTail, "the Poisson extension needs an exterior policy");
  }
  return ext.value({x, 0.0});
}

}  // namespace

double extension_constant(double s) {
  return std::pow(2.0, 2.0 * s - 1.0) * std::tgamma(s) / std::tgamma(1.0 - s);
}

double poisson_mass(double s, double y) {
  if (!(s > 0.0 && s < 1.0) || !(y > 0.0)) throw Error(ErrorCode::InvalidArgument, "poisson_mass needs s in (0,1), y > 0");
  boost::math::quadrature::exp_sinh<double> es;
  return 2.0 * es.integrate([&](double x) { return poisson_raw(s, x, y); }, 1e-14);
}

nlohmann::json ExtensionField::sidecar() const {
  return {{"heights", heights},
          {"s", s},
          {"normalization", normalization},
          {"a_ns", extension_constant(s)},
          {"c_ns", fractional_laplacian_constant(1, s)}};
}

std::vector<double> geometric_heights(double y_min, double ratio, int count) {
  if (!(y_min > 0.0) || !(ratio > 1.0) || count < 1) {
    throw Error(ErrorCode::InvalidArgument, "geometric heights need y_min > 0, ratio > 1, count >= 1");
  }
  std::vector<double> y(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) y[static_cast<std::size_t>(k)] = y_min * std::pow(ratio, k);
  return y;
}

ExtensionField poisson_extend(const GridFunction& u, const std::vector<double>& heights, double s) {
  const GridSpec& g = u.grid();
  require_1d(g);
  if (!(s > 0.0 && s < 1.0)) throw Error(ErrorCode::InvalidArgument, "extension order s must lie in (0,1)");
  const int N = g.shape[0];
  const double h = g.spacing;
  const double xl = g.origin[0] - h;
  const double xr = g.origin[0] + N * h;
  const double eL = ring_value(u, xl);
  const double eR = ring_value(u, xr);

  ExtensionField out;
  out.grid = g;
  out.heights = heights;
  out.s = s;
  for (double y : heights) {
    if (!(y > 0.0)) throw Error(ErrorCode::InvalidArgument, "extension heights must be positive");
    const double c = 1.0 / poisson_mass(s, y);
    // R[m + N + 1] = int_0^h (1 - xi/h) P(m h - xi); the left half is R[-m].
    std::vector<double> R(static_cast<std::size_t>(2 * N + 3));
    for (int m = -(N + 1); m <= N + 1; ++m) R[static_cast<std::size_t>(m + N + 1)] = half_hat(s, m * h, y, h);
    const auto Rm = [&](int m) { return R[static_cast<std::size_t>(m + N + 1)]; };
    std::vector<double> row(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
      double acc = 0.0;
      for (int j = 0; j < N; ++j) acc += u.at(j) * (Rm(i - j) + Rm(j - i));
      acc += eL * Rm(i + 1) + eR * Rm(N - i);
      const double x = g.origin[0] + i * h;
      acc += ray_integral(u.exterior(), s, x, y, xl, -1.0) + ray_integral(u.exterior(), s, x, y, xr, 1.0);
      row[static_cast<std::size_t>(i)] = c * acc;
    }
    out.values.push_back(std::move(row));
    out.normalization.push_back(c);
  }
  return out;
}

double poisson_value(const GridFunction& u, double s, double x, double y) {
  const GridSpec& g = u.grid();
  require_1d(g);
  if (!(y > 0.0)) throw Error(ErrorCode::InvalidArgument, "extension height must be positive");
  const int N = g.shape[0];
  const double h = g.spacing;
  const double xl = g.origin[0] - h;
  const double xr = g.origin[0] + N * h;
  const auto node_value = [&](int j) {
    if (j < 0) return ring_value(u, xl);
    if (j >= N) return ring_value(u, xr);
    return u.at(j);
  };
  double acc = 0.0;
  // Cell [x_j, x_{j+1}] carries hat halves of both end nodes.
  for (int j = -1; j < N; ++j) {
    const double xj = g.origin[0] + j * h;
    const double vj = node_value(j), vn = node_value(j + 1);
    if (vj != 0.0) acc += vj * half_hat(s, x - xj, y, h);
    if (vn != 0.0) acc += vn * half_hat(s, xj + h - x, y, h);
  }
  acc += ray_integral(u.exterior(), s, x, y, xl, -1.0) + ray_integral(u.exterior(), s, x, y, xr, 1.0);
  return acc / poisson_mass(s, y);
}

GridFunction neumann_trace(const ExtensionField& field, double a) {
  require_1d(field.grid);
  const std::size_t H = field.heights.size();
  if (H < 3) throw Error(ErrorCode::ExtrapolationUnstable, "the Neumann trace needs at least 3 heights");
  if (a == 0.0) a = extension_constant(field.s);
  const double s = field.s;
  const double ymax = *std::max_element(field.heights.begin(), field.heights.end());
  const std::vector<double> powers{0.0, 2.0 * s, 2.0, 2.0 + 2.0 * s};
  const auto nb = static_cast<Eigen::Index>(std::min<std::size_t>(powers.size(), H - 1));
  Eigen::MatrixXd V(static_cast<Eigen::Index>(H), nb);
  for (std::size_t k = 0; k < H; ++k) {
    for (Eigen::Index b = 0; b < nb; ++b) {
      V(static_cast<Eigen::Index>(k), b) = std::pow(field.heights[k] / ymax, powers[static_cast<std::size_t>(b)]);
    }
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(nb - 1) > 1e-12 * sv(0))) {
    throw Error(ErrorCode::ExtrapolationUnstable, "height fit is ill-conditioned");
  }
  // Row of the pseudo-inverse that yields the y^{2s} coefficient.
  Eigen::MatrixXd pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  const Eigen::VectorXd pick = pinv.row(1).transpose() / std::pow(ymax, 2.0 * s);

  const GridSpec& g = field.grid;
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double A = 0.0;
    for (std::size_t k = 0; k < H; ++k) A += pick(static_cast<Eigen::Index>(k)) * field.values[k][i];
    out[i] = -a * 2.0 * s * A;
    if (!std::isfinite(out[i])) throw Error(ErrorCode::ExtrapolationUnstable, "non-finite trace");
  }
  return GridFunction(g, std::move(out), Exterior::zero());
}

double weighted_harmonicity_residual(const ExtensionField& field) {
  const std::size_t H = field.heights.size();
  const auto N = static_cast<std::size_t>(field.grid.shape[0]);
  const double h = field.grid.spacing;
  const double s = field.s;
  const auto& y = field.heights;
  const auto& u = field.values;
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < H; ++k) {
    const double ym = 0.5 * (y[k] + y[k - 1]), yp = 0.5 * (y[k] + y[k + 1]);
    for (std::size_t i = 1; i + 1 < N; ++i) {
      const double uxx = (u[k][i + 1] - 2.0 * u[k][i] + u[k][i - 1]) / (h * h);
      const double flux_p = std::pow(yp, 1.0 - 2.0 * s) * (u[k + 1][i] - u[k][i]) / (y[k + 1] - y[k]);
      const double flux_m = std::pow(ym, 1.0 - 2.0 * s) * (u[k][i] - u[k - 1][i]) / (y[k] - y[k - 1]);
      const double div_y = (flux_p - flux_m) / (0.5 * (y[k + 1] - y[k - 1])) / std::pow(y[k], 1.0 - 2.0 * s);
      worst = std::max(worst, std::abs(uxx + div_y));
    }
  }
  return worst;
}

nlohmann::json Calibration::to_json() const {
  return {{"a_fit", a_fit}, {"a_analytic", a_analytic}, {"c_ns", c_ns}, {"max_rel_mismatch", max_rel_mismatch}};
}

Calibration calibrate_extension_constant(double s, double h, const QuadratureScheme& q) {
  const ClosedForm gauss = ClosedForm::from_tag("gaussian", {1.0, 1.0}, 1);
  const GridSpec g = GridSpec::covering(1, {-4.0, 0.0}, {4.0, 0.0}, h);
  const GridFunction u = GridFunction::sample(g, gauss, Exterior::closed_form(gauss));
  const ExtensionField ext = poisson_extend(u, geometric_heights(2.0 * h, std::pow(2.0, 0.25), 12), s);
  const GridFunction raw = neumann_trace(ext, 1.0);
  const HomogeneousKernel K = HomogeneousKernel::fractional_laplacian(1, s);

  Calibration c;
  c.a_analytic = extension_constant(s);
  c.c_ns = fractional_laplacian_constant(1, s);
  std::vector<double> lv, rv;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.node(i);
    if (std::abs(x[0]) > 2.0) continue;
    lv.push_back(eval_operator(u, K, x, q));
    rv.push_back(raw[i]);
  }
  double num = 0.0, den = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    num += lv[i] * rv[i];
    den += rv[i] * rv[i];
    scale = std::max(scale, std::abs(lv[i]));
  }
  c.a_fit = num / den;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    c.max_rel_mismatch = std::max(c.max_rel_mismatch, std::abs(c.a_fit * rv[i] - lv[i]) / scale);
  }
  return c;
}

nlohmann::json HalflineFit::to_json() const {
  return {{"coefficients", coefficients}, {"residual", residual}, {"liouville_form", liouville_form}};
}

}  // namespace freebnd
