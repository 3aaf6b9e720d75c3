#include <algorithm>
#include <cmath>
#include <limits>

#include "freebnd/regularity.hpp"

namespace freebnd {

QuotientResult quotient_regularity(const GridFunction& u1, const GridFunction& u2, const RegularizedDistance& d,
                                   double s, double c1, const HolderRegion& region, int k,
                                   const std::vector<double>& steps) {
  const GridSpec& g = d.field.grid();
  if (!(u1.grid() == g) || !(u2.grid() == g)) {
    throw Error(ErrorCode::InvalidArgument, "quotient inputs must share the grid of d");
  }
  const auto in_box = [&](const Point& x) {
    for (int a = 0; a < g.dim; ++a) {
      if (x[a] < region.lo[a] - 1e-9 * g.spacing || x[a] > region.hi[a] + 1e-9 * g.spacing) return false;
    }
    return true;
  };

  double worst = std::numeric_limits<double>::infinity();
  Point worst_at{0.0, 0.0};
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!(d.field[n] > 0.0) || !in_box(g.node(n))) continue;
    const double ratio = u2[n] / std::pow(d.field[n], s);
    if (ratio < worst) {
      worst = ratio;
      worst_at = g.node(n);
    }
  }
  if (worst < c1) {
    throw Error(ErrorCode::NondegeneracyViolated,
                "u2 / d^s = " + std::to_string(worst) + " < c1 = " + std::to_string(c1) + " at (" +
                    std::to_string(worst_at[0]) + ", " + std::to_string(worst_at[1]) + ")");
  }

  const double rho = (g.dim == 1 ? 24.0 : 6.0) * g.spacing;
  std::vector<double> q(g.size(), 0.0);
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!(d.field[n] > 0.0)) continue;
    const auto ij = g.unravel(n);
    bool edge = false;
    for (int a = 0; a < g.dim && !edge; ++a) {
      for (int sgn : {-1, 1}) {
        auto m = ij;
        m[a] += sgn;
        if (m[a] < 0 || m[a] >= g.shape[a] || !(d.field[g.index(m[0], m[1])] > 0.0)) edge = true;
      }
    }
    q[n] = u1[n] / u2[n];
    if (edge) {
      try {
        const Point x = g.node(n);
        const DsExpansion e1 = fit_ds_expansion(u1, d, s, x, rho, 1);
        const DsExpansion e2 = fit_ds_expansion(u2, d, s, x, rho, 1);
        q[n] = e1.polynomial(x) / e2.polynomial(x);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularGram) throw;
      }
    }
  }
  GridFunction quotient(g, std::move(q), Exterior::zero());

  HolderRegion r = region;
  const auto outer = region.admissible;
  r.admissible = [&g, &d, outer](const Point& p) {
    const auto ij = g.nearest(p);
    if (norm(g.node(ij[0], ij[1]) - p) > 1e-9 * g.spacing) return false;
    if (!(d.field.at(ij[0], ij[1]) > 0.0)) return false;
    return !outer || outer(p);
  };
  double scale = 0.0;
  for (double v : quotient.values()) scale = std::max(scale, std::abs(v));
  HolderEstimate est = estimate_holder(quotient, r, k, steps, 1e-10 * std::max(scale, 1.0));
  return QuotientResult{est, std::move(quotient)};
}

}  // namespace freebnd
