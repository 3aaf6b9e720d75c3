#include "freebnd/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace freebnd {

void ObstacleProblem::validate() const {
  const GridSpec& g = phi.grid();
  if (g.dim != kernel.dim()) throw Error(ErrorCode::InvalidArgument, "obstacle grid and kernel dimensions differ");
  const Point hi = g.upper();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (phi[k] <= 0.0) continue;
    const Point x = g.node(k);
    for (int a = 0; a < g.dim; ++a) {
      const double margin = std::min(x[a] - g.origin[a], hi[a] - x[a]);
      if (margin < 10.0 * g.spacing * (1.0 - 1e-9)) {
        throw Error(ErrorCode::InvalidArgument, "{phi > 0} must stay at least 10 cells away from the grid edge");
      }
    }
  }
}

nlohmann::json ObstacleResiduals::to_json() const {
  return {{"complementarity", complementarity},
          {"negative_Lv", negative_Lv},
          {"inactive_Lv", inactive_Lv},
          {"obstacle_violation", obstacle_violation}};
}

namespace {

ObstacleSolution finish(const DenseMatrix& A, const GridFunction& phi, std::vector<double> v, int iterations,
                        double tol) {
  const std::size_t n = v.size();
  Eigen::Map<const Eigen::VectorXd> vv(v.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd Av = A * vv;
  ObstacleResiduals r;
  std::vector<char> active(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double gap = v[i] - phi[i];
    const double lv = Av[static_cast<Eigen::Index>(i)];
    r.complementarity = std::max(r.complementarity, std::abs(std::min(gap, lv)));
    r.negative_Lv = std::max(r.negative_Lv, -lv);
    r.obstacle_violation = std::max(r.obstacle_violation, -gap);
    active[i] = gap <= 10.0 * tol;
    if (!active[i]) r.inactive_Lv = std::max(r.inactive_Lv, std::abs(lv));
  }
  return ObstacleSolution{GridFunction(phi.grid(), std::move(v), Exterior::zero()), std::move(active),
                          std::vector<double>(Av.data(), Av.data() + Av.size()), r, iterations, tol};
}

}  // namespace

ObstacleSolution solve_obstacle(const ObstacleProblem& p, const SolverOptions& opt) {
  p.validate();
  const DenseMatrix A = assemble_operator_matrix(p.phi.grid(), p.kernel, p.quadrature);
  return solve_obstacle(A, p.phi, opt);
}

ObstacleSolution solve_obstacle(const DenseMatrix& A, const GridFunction& phi, const SolverOptions& opt) {
  if (!(opt.omega > 0.0 && opt.omega < 2.0)) throw Error(ErrorCode::InvalidArgument, "PSOR omega must lie in (0,2)");
  if (!(opt.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "solver tol must be positive");
  const auto n = static_cast<Eigen::Index>(phi.grid().size());
  if (A.rows() != n || A.cols() != n) throw Error(ErrorCode::InvalidArgument, "matrix and obstacle sizes differ");

  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::max(phi[static_cast<std::size_t>(i)], 0.0);
  const Eigen::VectorXd diag = A.diagonal();
  const auto update = [&](Eigen::Index i) {
    const double r = A.row(i).dot(v);
    v[i] = std::max(phi[static_cast<std::size_t>(i)], v[i] - opt.omega * r / diag[i]);
  };
  const auto residual = [&]() {
    const Eigen::VectorXd Av = A * v;
    double res = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      res = std::max(res, std::abs(std::min(v[i] - phi[static_cast<std::size_t>(i)], Av[i])));
    }
    return res;
  };

  Eigen::VectorXd best = v;
  double best_res = residual();
  int it = 0;
  while (best_res > opt.tol && it < opt.max_iter) {
    for (int pass = 0; pass < 5 && it < opt.max_iter; ++pass) {
      for (Eigen::Index i = 0; i < n; ++i) update(i);
      for (Eigen::Index i = n - 1; i >= 0; --i) update(i);
      it += 2;
    }
    const double res = residual();
    if (res < best_res) {
      best_res = res;
      best = v;
    }
  }
  ObstacleSolution sol = finish(A, phi, std::vector<double>(best.data(), best.data() + best.size()), it, opt.tol);
  if (best_res > opt.tol) {
    throw ObstacleNoConvergence("PSOR stopped at complementarity residual " + std::to_string(best_res) + " after " +
                                    std::to_string(it) + " sweeps",
                                std::move(sol));
  }
  const double vmin = *std::min_element(sol.v.values().begin(), sol.v.values().end());
  if (vmin < -opt.tol) {
    throw ObstacleNoConvergence("PSOR produced a negative solution value " + std::to_string(vmin), std::move(sol));
  }
  return sol;
}

const char* to_string(PointClass c) {
  switch (c) {
    case PointClass::regular: return "regular";
    case PointClass::degenerate: return "degenerate";
    case PointClass::undetermined: return "undetermined";
  }
  return "?";
}

nlohmann::json FreeBoundaryPoint::to_json() const {
  return {{"location", {location[0], location[1]}},
          {"normal", {normal[0], normal[1]}},
          {"classification", to_string(classification)},
          {"growth_exponent", growth_exponent},
          {"fit_r2", fit_r2}};
}

GridFunction gap_function(const ObstacleSolution& sol, const GridFunction& phi) {
  std::vector<double> w(phi.grid().size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = sol.v[k] - phi[k];
  return GridFunction(phi.grid(), std::move(w), Exterior::zero());
}

Point compute_normal(const GridFunction& w, const Point& x, double eps_grad) {
  const double h = w.grid().spacing;
  const auto gradient = [&](const Point& c) {
    Point g{0.0, 0.0};
    for (int a = 0; a < w.dim(); ++a) {
      Point xp = c, xm = c;
      xp[a] += h;
      xm[a] -= h;
      g[a] = (w.value(xp) - w.value(xm)) / (2.0 * h);
    }
    return g;
  };
  Point g = gradient(x);
  double len = norm(g);
  if (!(len > eps_grad)) {
    throw Error(ErrorCode::DegenerateGradient, "|grad w| = " + std::to_string(len) + " at the free boundary point");
  }
  // At x the stencil straddles the contact set, where w is one-sided. Step
  // two cells into {w > 0} so that the stencil sees w on both sides.
  const Point inner = x + (2.0 * h / len) * g;
  const GridSpec& grid = w.grid();
  bool inside = true;
  for (int a = 0; a < w.dim(); ++a) {
    const double hi = grid.origin[a] + (grid.shape[a] - 1) * h;
    inside = inside && inner[a] - h >= grid.origin[a] && inner[a] + h <= hi;
  }
  if (inside) {
    const Point gi = gradient(inner);
    const double li = norm(gi);
    if (li > eps_grad) {
      g = gi;
      len = li;
    }
  }
  return (1.0 / len) * g;
}

std::vector<FreeBoundaryPoint> extract_free_boundary(const ObstacleSolution& sol, const GridFunction& phi,
                                                     double eps_grad) {
  const GridSpec& g = phi.grid();
  const double thr = 10.0 * sol.tol;
  const GridFunction w = gap_function(sol, phi);
  std::vector<FreeBoundaryPoint> out;
  for (int i = 0; i < g.shape[0]; ++i) {
    for (int j = 0; j < g.shape[1]; ++j) {
      const double a = w.at(i, j) - thr;
      for (int axis = 0; axis < g.dim; ++axis) {
        const int ni = i + (axis == 0);
        const int nj = j + (axis == 1);
        if (ni >= g.shape[0] || nj >= g.shape[1]) continue;
        const double b = w.at(ni, nj) - thr;
        if ((a <= 0.0) == (b <= 0.0)) continue;
        const double t = std::clamp(a / (a - b), 0.0, 1.0);
        FreeBoundaryPoint p;
        p.location = g.node(i, j);
        p.location[axis] += t * g.spacing;
        try {
          p.normal = compute_normal(w, p.location, eps_grad);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::DegenerateGradient) throw;
        }
        out.push_back(p);
      }
    }
  }
  if (out.empty()) throw Error(ErrorCode::EmptyFreeBoundary, "v - phi never crosses the contact threshold");
  return out;
}

GrowthFit growth_exponent(const GridFunction& w, const Point& x0, const std::vector<double>& radii) {
  if (radii.size() < 4) throw Error(ErrorCode::InsufficientRadii, "growth fit needs at least 4 radii");
  const GridSpec& g = w.grid();
  GrowthFit fit;
  fit.radii = radii;
  std::vector<double> lr, ls;
  for (double r : radii) {
    double sup = 0.0;
    const int lo0 = std::max(0, static_cast<int>(std::floor((x0[0] - r - g.origin[0]) / g.spacing)));
    const int hi0 = std::min(g.shape[0] - 1, static_cast<int>(std::ceil((x0[0] + r - g.origin[0]) / g.spacing)));
    int lo1 = 0, hi1 = 0;
    if (g.dim == 2) {
      lo1 = std::max(0, static_cast<int>(std::floor((x0[1] - r - g.origin[1]) / g.spacing)));
      hi1 = std::min(g.shape[1] - 1, static_cast<int>(std::ceil((x0[1] + r - g.origin[1]) / g.spacing)));
    }
    for (int i = lo0; i <= hi0; ++i) {
      for (int j = lo1; j <= hi1; ++j) {
        if (norm(g.node(i, j) - x0) <= r * (1.0 + 1e-12)) sup = std::max(sup, w.at(i, j));
      }
    }
    fit.sups.push_back(sup);
    if (!(sup > 0.0)) throw Error(ErrorCode::InsufficientRadii, "w vanishes on a whole ball; no growth to fit");
    lr.push_back(std::log(r));
    ls.push_back(std::log(sup));
  }
  const LineFit lf = fit_line(lr, ls);
  fit.exponent = lf.slope;
  fit.r2 = lf.r2;
  return fit;
}

PointClass classify_growth(double exponent, double r2, double s) {
  if (r2 < 0.98) return PointClass::undetermined;
  if (std::abs(exponent - (1.0 + s)) <= 0.15) return PointClass::regular;
  if (exponent >= 1.0 + s + 0.25) return PointClass::degenerate;
  return PointClass::undetermined;
}

std::vector<double> default_radii(const GridSpec& grid, const Point& x0, int max_levels) {
  std::vector<double> radii;
  const Point hi = grid.upper();
  for (int k = 0; k < max_levels; ++k) {
    const double r = 4.0 * grid.spacing * std::pow(2.0, k);
    bool inside = true;
    for (int a = 0; a < grid.dim; ++a) inside = inside && x0[a] - r >= grid.origin[a] && x0[a] + r <= hi[a];
    if (!inside) break;
    radii.push_back(r);
  }
  return radii;
}

FreeBoundaryPoint classify_point(const ObstacleSolution& sol, const GridFunction& phi, double s,
                                 FreeBoundaryPoint x0, const std::vector<double>& radii) {
  const GrowthFit fit = growth_exponent(gap_function(sol, phi), x0.location, radii);
  x0.growth_exponent = fit.exponent;
  x0.fit_r2 = fit.r2;
  x0.classification = norm(x0.normal) == 0.0 ? PointClass::undetermined : classify_growth(fit.exponent, fit.r2, s);
  return x0;
}

GridFunction differentiate_gap(const GridFunction& w, int axis, double threshold) {
  const GridSpec& g = w.grid();
  if (axis < 0 || axis >= g.dim) throw Error(ErrorCode::InvalidArgument, "derivative axis out of range");
  const double h = g.spacing;
  const int n = g.shape[axis];
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (w[k] <= threshold) continue;
    const auto ij = g.unravel(k);
    const auto at = [&](int m) {
      auto q = ij;
      q[axis] += m;
      return w.at(q[0], q[1]);
    };
    const auto usable = [&](int m) {
      const int q = ij[axis] + m;
      return q >= 0 && q < n && at(m) > threshold;
    };
    const int pos = ij[axis];
    const bool left = usable(-1);
    const bool right = usable(1);
    double d = 0.0;
    if ((left && right) || (!left && !right && pos > 0 && pos + 1 < n)) {
      d = (at(1) - at(-1)) / (2.0 * h);
    } else if (right) {
      d = pos + 2 < n ? (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h) : (at(1) - at(0)) / h;
    } else if (left) {
      d = pos - 2 >= 0 ? (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h) : (at(0) - at(-1)) / h;
    }
    out[k] = d;
  }
  return GridFunction(g, std::move(out), Exterior::zero());
}

GridFunction differentiate_solution(const ObstacleSolution& sol, const GridFunction& phi, int axis) {
  return differentiate_gap(gap_function(sol, phi), axis, 10.0 * sol.tol);
}

}  // namespace freebnd
