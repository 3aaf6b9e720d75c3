#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "freebnd/regularity.hpp"

namespace freebnd {
namespace {

std::vector<std::array<int, 2>> multi_indices(int dim, int degree) {
  std::vector<std::array<int, 2>> out;
  for (int total = 0; total <= degree; ++total) {
    if (dim == 1) {
      out.push_back({total, 0});
      continue;
    }
    for (int a = total; a >= 0; --a) out.push_back({a, total - a});
  }
  return out;
}

double monomial(const std::array<int, 2>& a, const Point& y) {
  return std::pow(y[0], a[0]) * std::pow(y[1], a[1]);
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

double DsExpansion::polynomial(const Point& x) const {
  const Point y = x - z;
  double acc = 0.0;
  for (std::size_t i = 0; i < coefficients.size(); ++i) acc += coefficients[i] * monomial(multi_indices[i], y);
  return acc;
}

nlohmann::json DsExpansion::to_json() const {
  nlohmann::json coeffs = nlohmann::json::array();
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    coeffs.push_back({{"alpha", {multi_indices[i][0], multi_indices[i][1]}}, {"q", coefficients[i]}});
  }
  return {{"z", {z[0], z[1]}},
          {"degree", degree},
          {"radius", radius},
          {"coefficients", coeffs},
          {"residual_sup", residual_sup},
          {"u_sup", u_sup},
          {"orthogonality", orthogonality},
          {"nodes", nodes}};
}

DsExpansion fit_ds_expansion(const GridFunction& u, const RegularizedDistance& d, double s, const Point& z, double r,
                             int degree) {
  if (degree < 0 || degree > 3) throw Error(ErrorCode::InvalidArgument, "expansion degree must lie in [0,3]");
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "expansion radius must be positive");
  const GridSpec& g = u.grid();
  if (!(g == d.field.grid())) throw Error(ErrorCode::InvalidArgument, "u and d live on different grids");

  DsExpansion e;
  e.z = z;
  e.degree = degree;
  e.radius = r;
  e.multi_indices = multi_indices(g.dim, degree);
  const std::size_t nb = e.multi_indices.size();

  std::vector<double> rows, values;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point x = g.node(k);
    if (norm(x - z) > r * (1.0 + 1e-12) || !(d.field[k] > 0.0)) continue;
    const double ds = std::pow(d.field[k], s);
    const Point y = (1.0 / r) * (x - z);
    for (const auto& a : e.multi_indices) rows.push_back(ds * monomial(a, y));
    values.push_back(u[k]);
  }
  e.nodes = values.size();
  if (e.nodes < std::max<std::size_t>(20, nb)) {
    throw Error(ErrorCode::SingularGram, "B_r(z) meets the domain in only " + std::to_string(e.nodes) + " nodes");
  }
  const auto m = static_cast<Eigen::Index>(e.nodes);
  const auto n = static_cast<Eigen::Index>(nb);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Phi(rows.data(), m, n);
  Eigen::Map<const Eigen::VectorXd> U(values.data(), m);
  const Eigen::MatrixXd G = Phi.transpose() * Phi;
  const Eigen::VectorXd b = Phi.transpose() * U;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) {
    throw Error(ErrorCode::SingularGram, "Gram matrix is singular (rcond " + std::to_string(ldlt.rcond()) + ")");
  }
  const Eigen::VectorXd c = ldlt.solve(b);
  const Eigen::VectorXd res = U - Phi * c;

  e.coefficients.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const int order = e.multi_indices[i][0] + e.multi_indices[i][1];
    e.coefficients[i] = c[static_cast<Eigen::Index>(i)] / std::pow(r, order);
  }
  e.residual_sup = res.cwiseAbs().maxCoeff();
  e.u_sup = U.cwiseAbs().maxCoeff();
  const double unorm = U.norm();
  if (unorm > 0.0) {
    const Eigen::VectorXd proj = Phi.transpose() * res;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double cn = Phi.col(i).norm();
      if (cn > 0.0) e.orthogonality = std::max(e.orthogonality, std::abs(proj[i]) / (unorm * cn));
    }
  }
  return e;
}

nlohmann::json DecayFit::to_json() const {
  nlohmann::json ce = nlohmann::json::array();
  for (double v : coefficient_exponents) ce.push_back(number_or_null(v));
  return {{"fitted_decay", number_or_null(fitted_decay)},
          {"r2", r2},
          {"saturated", saturated},
          {"coefficient_exponents", ce},
          {"coefficients_stable", coefficients_stable}};
}

DecayFit verify_expansion_decay(const std::vector<DsExpansion>& expansions) {
  if (expansions.size() < 4) throw Error(ErrorCode::InsufficientRadii, "expansion decay needs at least 4 radii");
  std::vector<DsExpansion> ex = expansions;
  std::sort(ex.begin(), ex.end(), [](const DsExpansion& a, const DsExpansion& b) { return a.radius > b.radius; });
  double scale = 0.0;
  for (const auto& e : ex) {
    if (e.degree != ex[0].degree || norm(e.z - ex[0].z) > 1e-12) {
      throw Error(ErrorCode::InsufficientRadii, "expansions must share base point and degree");
    }
    scale = std::max(scale, e.u_sup);
  }
  const double floor = 1e-10 * scale;

  DecayFit out;
  std::vector<double> lr, lres;
  for (const auto& e : ex) {
    if (e.residual_sup > floor) {
      lr.push_back(std::log(e.radius));
      lres.push_back(std::log(e.residual_sup));
    }
  }
  if (lr.size() < 2) {
    out.saturated = true;
    out.fitted_decay = std::numeric_limits<double>::quiet_NaN();
    out.r2 = 1.0;
  } else {
    const LineFit f = fit_line(lr, lres);
    out.fitted_decay = f.slope;
    out.r2 = f.r2;
  }

  // |q_r - q_{r/2}| <= C r^{beta - |alpha|} with beta = decay - s > decay - 1.
  const std::size_t nb = ex[0].coefficients.size();
  for (std::size_t a = 0; a < nb; ++a) {
    const int order = ex[0].multi_indices[a][0] + ex[0].multi_indices[a][1];
    std::vector<double> x, y;
    for (std::size_t i = 0; i + 1 < ex.size(); ++i) {
      const double diff = std::abs(ex[i].coefficients[a] - ex[i + 1].coefficients[a]);
      if (diff > floor / std::pow(ex[i].radius, order)) {
        x.push_back(std::log(ex[i].radius));
        y.push_back(std::log(diff));
      }
    }
    double slope = std::numeric_limits<double>::quiet_NaN();
    if (x.size() >= 2) slope = fit_line(x, y).slope;
    out.coefficient_exponents.push_back(slope);
    if (std::isfinite(slope) && std::isfinite(out.fitted_decay) && slope < out.fitted_decay - 1.0 - order - 0.1) {
      out.coefficients_stable = false;
    }
  }
  return out;
}

}  // namespace freebnd
