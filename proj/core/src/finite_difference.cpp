#include <algorithm>
#include <cmath>

#include "freebnd/regularity.hpp"

namespace freebnd {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::consistent: return "consistent";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::violated: return "violated";
  }
  return "?";
}

std::vector<double> FiniteDifferenceOp::weights() const {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "finite difference order must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(k) + 1);
  double c = 1.0;
  for (int i = 0; i <= k; ++i) {
    w[static_cast<std::size_t>(i)] = (i % 2 == 0 ? 1.0 : -1.0) * c;
    c = c * (k - i) / (i + 1);
  }
  return w;
}

double FiniteDifferenceOp::apply(const Field& f, const Point& x) const {
  const auto w = weights();
  const auto* grid = dynamic_cast<const GridFunction*>(&f);
  double acc = 0.0;
  for (int i = 0; i <= k; ++i) {
    const Point p = x + (0.5 * k - i) * h;
    if (grid != nullptr) {
      const GridSpec& g = grid->grid();
      const Point hi = g.upper();
      const double tol = 1e-9 * g.spacing;
      for (int a = 0; a < g.dim; ++a) {
        if (p[a] < g.origin[a] - tol || p[a] > hi[a] + tol) {
          throw Error(ErrorCode::SampleOutsideDomain, "finite-difference sample lies outside the grid");
        }
      }
    }
    acc += w[static_cast<std::size_t>(i)] * f.value(p);
  }
  return acc;
}

double finite_difference(const Field& f, int k, const Point& h, const Point& x) {
  return FiniteDifferenceOp{k, h}.apply(f, x);
}

std::vector<double> dyadic_steps(double h0, int levels) {
  std::vector<double> steps;
  for (int j = 0; j < levels; ++j) steps.push_back(h0 * std::pow(2.0, j));
  return steps;
}

nlohmann::json HolderEstimate::to_json() const {
  return {{"exponent", exponent}, {"constant", constant}, {"k_used", k_used}, {"steps", steps},
          {"sups", sups},         {"r2", r2},             {"saturated", saturated}, {"raw_slope", raw_slope}};
}

HolderEstimate estimate_holder(const Field& f, const HolderRegion& region, int k, const std::vector<double>& steps,
                               double noise_floor) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "Holder probe order must be >= 1");
  if (!(region.spacing > 0.0)) throw Error(ErrorCode::InvalidArgument, "Holder region needs a lattice spacing");
  const int dim = f.dim();
  std::array<long, 2> count{1, 1};
  for (int a = 0; a < dim; ++a) {
    count[static_cast<std::size_t>(a)] =
        static_cast<long>(std::floor((region.hi[a] - region.lo[a]) / region.spacing + 1e-9)) + 1;
  }
  const double tol = 1e-9 * region.spacing;
  const auto in_region = [&](const Point& p) {
    for (int a = 0; a < dim; ++a) {
      if (p[a] < region.lo[a] - tol || p[a] > region.hi[a] + tol) return false;
    }
    return !region.admissible || region.admissible(p);
  };
  const FiniteDifferenceOp probe{k, {0.0, 0.0}};
  const auto w = probe.weights();

  HolderEstimate est;
  est.k_used = k;
  std::vector<double> lh, lm;
  int levels = 0;
  for (double h : steps) {
    double sup = -1.0;
    for (long i = 0; i < count[0]; ++i) {
      for (long j = 0; j < count[1]; ++j) {
        const Point x{region.lo[0] + static_cast<double>(i) * region.spacing,
                      dim == 2 ? region.lo[1] + static_cast<double>(j) * region.spacing : 0.0};
        for (const Point& dir : region.directions) {
          bool ok = true;
          double acc = 0.0;
          for (int m = 0; m <= k && ok; ++m) {
            const Point p = x + ((0.5 * k - m) * h) * dir;
            ok = in_region(p);
            if (ok) acc += w[static_cast<std::size_t>(m)] * f.value(p);
          }
          if (ok) sup = std::max(sup, std::abs(acc));
        }
      }
    }
    if (sup < 0.0) continue;
    ++levels;
    est.steps.push_back(h);
    est.sups.push_back(sup);
    if (sup > noise_floor) {
      lh.push_back(std::log(h));
      lm.push_back(std::log(sup));
    }
  }
  if (levels < 4) {
    throw Error(ErrorCode::InsufficientLevels,
                "only " + std::to_string(levels) + " dyadic levels fit inside the probe region (need 4)");
  }
  if (lh.size() < 2) {
    est.exponent = k;
    est.raw_slope = k;
    est.constant = *std::max_element(est.sups.begin(), est.sups.end());
    est.r2 = 1.0;
    est.saturated = true;
    return est;
  }
  const LineFit fit = fit_line(lh, lm);
  est.raw_slope = fit.slope;
  est.exponent = std::min(fit.slope, static_cast<double>(k));
  est.constant = std::exp(fit.intercept);
  est.r2 = std::clamp(fit.r2, 0.0, 1.0);
  est.saturated = fit.slope >= k - 0.05;
  return est;
}

nlohmann::json RegularityReport::to_json() const {
  return {{"target", target}, {"inputs", inputs}, {"exponents", exponents},
          {"constants", constants}, {"r2", r2}, {"verdict", to_string(verdict)}};
}

}  // namespace freebnd
