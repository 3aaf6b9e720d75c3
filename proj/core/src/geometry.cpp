#include "freebnd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace freebnd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

// Smallest positive root of |x + t dir - c| = R.
double sphere_hit(const Point& x, const Point& dir, const Point& c, double R) {
  const Point q = x - c;
  const double b = dot(q, dir);
  const double cc = dot(q, q) - R * R;
  const double disc = b * b - cc;
  if (disc < 0.0) return kInf;
  const double sq = std::sqrt(disc);
  const double t1 = -b - sq;
  const double t2 = -b + sq;
  if (t1 > 0.0) return t1;
  if (t2 > 0.0) return t2;
  return kInf;
}

}  // namespace

Domain Domain::interval(double a, double b) {
  if (!(a < b)) throw Error(ErrorCode::InvalidArgument, "interval domain needs a < b");
  Domain d;
  d.tag_ = Tag::interval;
  d.dim_ = 1;
  d.beta_ = kInf;
  d.lo_ = {a, 0.0};
  d.hi_ = {b, 0.0};
  return d;
}

Domain Domain::disk(const Point& center, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "disk domain needs radius > 0");
  Domain d;
  d.tag_ = Tag::disk;
  d.dim_ = 2;
  d.beta_ = kInf;
  d.center_ = center;
  d.radius_ = radius;
  d.lo_ = {center[0] - radius, center[1] - radius};
  d.hi_ = {center[0] + radius, center[1] + radius};
  return d;
}

Domain Domain::half_space(int dim, const Point& e, double offset, const Point& lo, const Point& hi) {
  if (dim != 1 && dim != 2) throw Error(ErrorCode::InvalidArgument, "half-space dim must be 1 or 2");
  Point n = e;
  if (dim == 1) n[1] = 0.0;
  if (std::abs(norm(n) - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "half-space normal must be a unit vector");
  Domain d;
  d.tag_ = Tag::half_space;
  d.dim_ = dim;
  d.beta_ = kInf;
  d.normal_ = n;
  d.offset_ = offset;
  d.lo_ = lo;
  d.hi_ = hi;
  if (dim == 1) d.lo_[1] = d.hi_[1] = 0.0;
  return d;
}

Domain Domain::graph(double x1_lo, double x1_hi, std::vector<double> profile, double beta, double top) {
  if (!(x1_lo < x1_hi)) throw Error(ErrorCode::InvalidArgument, "graph domain needs x_lo < x_hi");
  if (profile.size() < 2) throw Error(ErrorCode::InvalidArgument, "graph profile needs at least two samples");
  double pmin = kInf, pmax = -kInf;
  for (double v : profile) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "graph profile values must be finite");
    pmin = std::min(pmin, v);
    pmax = std::max(pmax, v);
  }
  if (!(top > pmax)) throw Error(ErrorCode::InvalidArgument, "graph domain top must lie above the profile");
  Domain d;
  d.tag_ = Tag::graph;
  d.dim_ = 2;
  d.beta_ = beta;
  d.profile_ = std::move(profile);
  d.top_ = top;
  d.lo_ = {x1_lo, pmin};
  d.hi_ = {x1_hi, top};
  return d;
}

Domain Domain::from_json(const nlohmann::json& j) {
  try {
    const auto tag = j.at("tag").get<std::string>();
    if (tag == "interval") return interval(j.at("a").get<double>(), j.at("b").get<double>());
    if (tag == "disk") {
      const auto c = j.value("center", std::vector<double>{0.0, 0.0});
      return disk({c.at(0), c.at(1)}, j.at("radius").get<double>());
    }
    if (tag == "half_space") {
      const int dim = j.at("dim").get<int>();
      auto e = j.at("normal").get<std::vector<double>>();
      auto lo = j.at("box_lo").get<std::vector<double>>();
      auto hi = j.at("box_hi").get<std::vector<double>>();
      e.resize(2, 0.0);
      lo.resize(2, 0.0);
      hi.resize(2, 0.0);
      return half_space(dim, {e[0], e[1]}, j.value("offset", 0.0), {lo[0], lo[1]}, {hi[0], hi[1]});
    }
    if (tag == "graph") {
      const double xlo = j.at("x_lo").get<double>();
      const double xhi = j.at("x_hi").get<double>();
      std::vector<double> samples;
      if (j.contains("samples")) {
        samples = j.at("samples").get<std::vector<double>>();
      } else {
        const auto f = ClosedForm::from_json(j.at("profile"), 1);
        const int n = j.value("samples_count", 4096);
        samples.resize(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) samples[static_cast<std::size_t>(k)] = f({xlo + (xhi - xlo) * k / n, 0.0});
      }
      return graph(xlo, xhi, std::move(samples), j.at("beta").get<double>(), j.at("top").get<double>());
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown domain tag '" + tag + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("domain block: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    throw Error(ErrorCode::ConfigInvalid, std::string("domain block: ") + e.what());
  }
}

std::string Domain::tag_name() const {
  switch (tag_) {
    case Tag::interval: return "interval";
    case Tag::disk: return "disk";
    case Tag::half_space: return "half_space";
    case Tag::graph: return "graph";
  }
  return "";
}

double Domain::profile(double x1) const {
  const double n = static_cast<double>(profile_.size());
  double t = (x1 - lo_[0]) / period() * n;
  t -= n * std::floor(t / n);
  const double fl = std::floor(t);
  const auto i0 = static_cast<std::size_t>(fl) % profile_.size();
  const std::size_t i1 = (i0 + 1) % profile_.size();
  const double f = t - fl;
  return (1.0 - f) * profile_[i0] + f * profile_[i1];
}

bool Domain::contains(const Point& x) const {
  if (tag_ == Tag::graph) return x[1] > profile(x[0]) && x[1] < top_;
  return signed_distance(x) > 0.0;
}

double Domain::signed_distance(const Point& x) const {
  switch (tag_) {
    case Tag::interval: return std::min(x[0] - lo_[0], hi_[0] - x[0]);
    case Tag::disk: return radius_ - norm(x - center_);
    case Tag::half_space: return dot(x, normal_) - offset_;
    case Tag::graph: break;
  }
  const double p = profile(x[0]);
  const bool inside = x[1] > p && x[1] < top_;
  double best = std::min(std::abs(x[1] - p), std::abs(top_ - x[1]));
  const double dx = period() / static_cast<double>(profile_.size());
  const long n = static_cast<long>(profile_.size());
  // Sample points lie on the boundary, so a sparse pass over them tightens
  // the search window before the exact segment pass.
  constexpr long kStride = 32;
  {
    const long c0 = static_cast<long>(std::floor((x[0] - best - lo_[0]) / dx));
    const long c1 = static_cast<long>(std::ceil((x[0] + best - lo_[0]) / dx));
    for (long k = c0 - c0 % kStride; k <= c1; k += kStride) {
      const long i = ((k % n) + n) % n;
      best = std::min(best, norm(x - Point{lo_[0] + k * dx, profile_[static_cast<std::size_t>(i)]}));
    }
  }
  const long k0 = static_cast<long>(std::floor((x[0] - best - lo_[0]) / dx)) - 1;
  const long k1 = static_cast<long>(std::ceil((x[0] + best - lo_[0]) / dx)) + 1;
  for (long k = k0; k < k1; ++k) {
    const long i0 = ((k % n) + n) % n;
    const long i1 = (i0 + 1) % n;
    const Point a{lo_[0] + k * dx, profile_[static_cast<std::size_t>(i0)]};
    const Point b{lo_[0] + (k + 1) * dx, profile_[static_cast<std::size_t>(i1)]};
    best = std::min(best, segment_distance(x, a, b));
  }
  return inside ? best : -best;
}

double Domain::axis_crossing(const Point& x, int axis, int sign, double limit) const {
  Point dir{0.0, 0.0};
  dir[axis] = sign;
  switch (tag_) {
    case Tag::interval: {
      const double t = sign > 0 ? hi_[0] - x[0] : x[0] - lo_[0];
      return t > 0.0 ? t : kInf;
    }
    case Tag::disk: return sphere_hit(x, dir, center_, radius_);
    case Tag::half_space: {
      const double rate = dot(dir, normal_);
      if (rate == 0.0) return kInf;
      const double t = -(dot(x, normal_) - offset_) / rate;
      return t > 0.0 ? t : kInf;
    }
    case Tag::graph: break;
  }
  if (axis == 1) {
    const double t = sign > 0 ? top_ - x[1] : x[1] - profile(x[0]);
    return t > 0.0 ? t : kInf;
  }
  // Horizontal ray against the piecewise linear profile.
  const double dx = period() / static_cast<double>(profile_.size());
  std::vector<double> knots{0.0};
  const double start = (x[0] - lo_[0]) / dx;
  for (long k = static_cast<long>(sign > 0 ? std::floor(start) + 1 : std::ceil(start) - 1);; k += sign) {
    const double t = std::abs(lo_[0] + k * dx - x[0]);
    if (t >= limit) break;
    if (t > 0.0) knots.push_back(t);
  }
  knots.push_back(limit);
  double g0 = x[1] - profile(x[0]);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double g1 = x[1] - profile(x[0] + sign * knots[i + 1]);
    if ((g0 > 0.0) != (g1 > 0.0)) return knots[i] + (knots[i + 1] - knots[i]) * g0 / (g0 - g1);
    g0 = g1;
  }
  return kInf;
}

Point Domain::inward_normal(const Point& z) const {
  switch (tag_) {
    case Tag::interval: return {std::abs(z[0] - lo_[0]) <= std::abs(z[0] - hi_[0]) ? 1.0 : -1.0, 0.0};
    case Tag::disk: {
      const Point v = center_ - z;
      const double len = norm(v);
      if (len == 0.0) throw Error(ErrorCode::InvalidArgument, "no normal at the disk center");
      return (1.0 / len) * v;
    }
    case Tag::half_space: return normal_;
    case Tag::graph: break;
  }
  const double dx = period() / static_cast<double>(profile_.size());
  const double slope = (profile(z[0] + dx) - profile(z[0] - dx)) / (2.0 * dx);
  const double len = std::hypot(slope, 1.0);
  return {-slope / len, 1.0 / len};
}

std::optional<ClosedForm> Domain::closed_form_distance() const {
  switch (tag_) {
    case Tag::interval:
      return ClosedForm::from_tag("ball_torsion_power", {1.0, 0.5 * (hi_[0] - lo_[0]), 0.5 * (hi_[0] + lo_[0])}, 1);
    case Tag::disk:
      return ClosedForm::from_tag("ball_torsion_power", {1.0, radius_, center_[0], center_[1]}, 2);
    case Tag::half_space:
      if (dim_ == 1) return ClosedForm::from_tag("halfspace_power", {1.0, normal_[0], offset_}, 1);
      return ClosedForm::from_tag("halfspace_power", {1.0, normal_[0], normal_[1], offset_}, 2);
    case Tag::graph: break;
  }
  return std::nullopt;
}

double Domain::thinnest_feature() const {
  switch (tag_) {
    case Tag::interval: return hi_[0] - lo_[0];
    case Tag::disk: return 2.0 * radius_;
    case Tag::half_space: return kInf;
    case Tag::graph: break;
  }
  double w = kInf;
  for (double v : profile_) w = std::min(w, top_ - v);
  return w;
}

nlohmann::json Domain::to_json() const {
  nlohmann::json j{{"tag", tag_name()}, {"dim", dim_}};
  j["beta"] = std::isfinite(beta_) ? nlohmann::json(beta_) : nlohmann::json("inf");
  switch (tag_) {
    case Tag::interval:
      j["a"] = lo_[0];
      j["b"] = hi_[0];
      break;
    case Tag::disk:
      j["center"] = {center_[0], center_[1]};
      j["radius"] = radius_;
      break;
    case Tag::half_space:
      j["normal"] = {normal_[0], normal_[1]};
      j["offset"] = offset_;
      j["box_lo"] = {lo_[0], lo_[1]};
      j["box_hi"] = {hi_[0], hi_[1]};
      break;
    case Tag::graph:
      j["x_lo"] = lo_[0];
      j["x_hi"] = hi_[0];
      j["top"] = top_;
      j["samples"] = profile_;
      break;
  }
  return j;
}

double dist_to_boundary(const Domain& domain, const Point& x) { return domain.signed_distance(x); }

nlohmann::json RegularizedDistance::describe() const {
  return {{"domain", domain.tag_name()},
          {"mode", mode == Mode::closed_form ? "closed-form" : "torsion-solve"},
          {"C_cmp", C_cmp},
          {"iterations", iterations},
          {"residual", residual},
          {"construction", "torsion function, -Laplace d = 1 in the domain, d = 0 outside"}};
}

double comparability_constant(const Domain& domain, const GridFunction& d) {
  const GridSpec& g = d.grid();
  double c = 1.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point x = g.node(k);
    const double dist = domain.signed_distance(x);
    if (dist <= 0.0) continue;
    const double v = d[k];
    if (v <= 0.0) return kInf;
    c = std::max({c, v / dist, dist / v});
  }
  return c;
}

namespace {

struct TorsionRow {
  std::size_t node;
  double diag = 0.0;
  int count = 0;
  std::array<long, 4> nb{};
  std::array<double, 4> coef{};
};

GridFunction solve_torsion(const Domain& domain, const GridSpec& grid, double tol, int max_iter, int& iters,
                           double& residual) {
  const double h = grid.spacing;
  const bool periodic = domain.tag() == Domain::Tag::graph;
  int period_cells = grid.shape[0];
  if (periodic) {
    period_cells = static_cast<int>(std::lround(domain.period() / h));
    if (std::abs(period_cells * h - domain.period()) > 1e-9 * domain.period() ||
        std::abs(grid.origin[0] - domain.box_lo()[0]) > 1e-9 * h || grid.shape[0] < period_cells) {
      throw Error(ErrorCode::UnresolvedBoundary,
                  "graph domain grid must start at x_lo and span a whole number of cells per period");
    }
  }

  // Unknown id per node (-1 outside the domain); periodic copies share ids.
  std::vector<long> id(grid.size(), -1);
  std::vector<TorsionRow> rows;
  for (int i = 0; i < std::min(grid.shape[0], period_cells); ++i) {
    for (int j = 0; j < grid.shape[1]; ++j) {
      const std::size_t k = grid.index(i, j);
      if (domain.contains(grid.node(k))) {
        id[k] = static_cast<long>(rows.size());
        rows.push_back({k});
      }
    }
  }
  if (periodic) {
    for (int i = period_cells; i < grid.shape[0]; ++i) {
      for (int j = 0; j < grid.shape[1]; ++j) id[grid.index(i, j)] = id[grid.index(i % period_cells, j)];
    }
  }
  if (rows.empty()) throw Error(ErrorCode::UnresolvedBoundary, "no grid node lies inside the domain");

  for (auto& row : rows) {
    const auto ij = grid.unravel(row.node);
    const Point x = grid.node(row.node);
    for (int a = 0; a < grid.dim; ++a) {
      std::array<double, 2> dist{};
      std::array<long, 2> nb{};
      for (int side = 0; side < 2; ++side) {
        const int sign = side == 0 ? -1 : 1;
        std::array<int, 2> n = ij;
        n[a] += sign;
        if (periodic && a == 0) n[0] = ((n[0] % period_cells) + period_cells) % period_cells;
        const bool in_grid = n[0] >= 0 && n[0] < grid.shape[0] && n[1] >= 0 && n[1] < grid.shape[1];
        const long nid = in_grid ? id[grid.index(n[0], n[1])] : -1;
        if (nid >= 0) {
          dist[side] = h;
          nb[side] = nid;
        } else {
          const double t = domain.axis_crossing(x, a, sign, h);
          if (!in_grid && !(t <= h * (1.0 + 1e-12))) {
            throw Error(ErrorCode::UnresolvedBoundary, "grid does not cover the domain");
          }
          dist[side] = std::clamp(t, 1e-12 * h, h);
          nb[side] = -1;
        }
      }
      const double s = 2.0 / (dist[0] + dist[1]);
      for (int side = 0; side < 2; ++side) {
        const double c = s / dist[side];
        row.diag += c;
        if (nb[side] >= 0) {
          row.nb[static_cast<std::size_t>(row.count)] = nb[side];
          row.coef[static_cast<std::size_t>(row.count)] = c;
          ++row.count;
        }
      }
    }
  }

  double lambda_min = 0.0;
  for (int a = 0; a < grid.dim; ++a) {
    if (periodic && a == 0) continue;
    const double L = domain.box_hi()[a] - domain.box_lo()[a];
    lambda_min += std::numbers::pi * std::numbers::pi / (L * L);
  }
  const double rho = std::max(0.0, 1.0 - lambda_min * h * h / (2.0 * grid.dim));
  const double omega = 2.0 / (1.0 + std::sqrt(1.0 - rho * rho));

  std::vector<double> u(rows.size(), 0.0);
  const auto row_residual = [&](const TorsionRow& r, std::size_t k) {
    double acc = 1.0 - r.diag * u[k];
    for (int m = 0; m < r.count; ++m) acc += r.coef[static_cast<std::size_t>(m)] * u[static_cast<std::size_t>(r.nb[static_cast<std::size_t>(m)])];
    return acc;
  };
  iters = 0;
  residual = kInf;
  while (iters < max_iter) {
    for (std::size_t k = 0; k < rows.size(); ++k) u[k] += omega * row_residual(rows[k], k) / rows[k].diag;
    ++iters;
    if (iters % 10 == 0 || iters == max_iter) {
      residual = 0.0;
      for (std::size_t k = 0; k < rows.size(); ++k) residual = std::max(residual, std::abs(row_residual(rows[k], k)));
      if (residual <= tol) break;
    }
  }
  if (residual > tol) {
    throw Error(ErrorCode::NoConvergence, "torsion solve stopped at residual " + std::to_string(residual) +
                                              " after " + std::to_string(iters) + " sweeps");
  }
  std::vector<double> values(grid.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (id[k] >= 0) values[k] = u[static_cast<std::size_t>(id[k])];
  }
  return GridFunction(grid, std::move(values), Exterior::zero());
}

}  // namespace

RegularizedDistance build_regularized_distance(const Domain& domain, const GridSpec& grid, double tol,
                                               bool force_solve, int max_iter) {
  if (grid.dim != domain.dim()) throw Error(ErrorCode::InvalidArgument, "grid and domain dimensions differ");
  if (domain.thinnest_feature() < 4.0 * grid.spacing) {
    throw Error(ErrorCode::UnresolvedBoundary, "domain is thinner than 4 grid cells");
  }
  RegularizedDistance out{domain, GridFunction(grid, std::vector<double>(grid.size(), 0.0), Exterior::zero()),
                          1.0, RegularizedDistance::Mode::closed_form, domain.closed_form_distance(), 0, 0.0};
  if (out.form && !force_solve) {
    out.mode = RegularizedDistance::Mode::closed_form;
    out.field = GridFunction::sample(grid, *out.form, Exterior::closed_form(*out.form));
  } else {
    if (domain.tag() == Domain::Tag::half_space) {
      throw Error(ErrorCode::InvalidArgument, "the torsion problem has no solution in a half-space");
    }
    out.mode = RegularizedDistance::Mode::torsion_solve;
    out.field = solve_torsion(domain, grid, tol, max_iter, out.iterations, out.residual);
  }
  out.C_cmp = comparability_constant(domain, out.field);
  return out;
}

GridFunction d_power(const RegularizedDistance& d, double s) {
  if (!(s > 0.0 && s < 1.0)) throw Error(ErrorCode::InvalidArgument, "d_power needs 0 < s < 1");
  std::vector<double> v(d.field.grid().size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = d.field[k] > 0.0 ? std::pow(d.field[k], s) : 0.0;
  Exterior ext = Exterior::zero();
  if (d.form && d.mode == RegularizedDistance::Mode::closed_form) {
    auto p = d.form->params();
    p[0] *= s;
    ext = Exterior::closed_form(ClosedForm::from_tag(d.form->tag(), p, d.form->dim()));
  }
  return GridFunction(d.field.grid(), std::move(v), std::move(ext));
}

}  // namespace freebnd
