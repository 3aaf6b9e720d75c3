#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "freebnd/geometry.hpp"
#include "freebnd/operator.hpp"

namespace freebnd {

enum class Verdict { consistent, inconclusive, violated };
const char* to_string(Verdict v);

/// Delta_h^k f(x) = sum_i (-1)^i C(k,i) f(x + (k/2 - i) h).
struct FiniteDifferenceOp {
  int k = 1;
  Point h{0.0, 0.0};

  std::vector<double> weights() const;
  double apply(const Field& f, const Point& x) const;
};

/// Unnormalized centred difference of order k with step vector h. Sample
/// points of a grid function must lie in its closed hull.
double finite_difference(const Field& f, int k, const Point& h, const Point& x);

/// Base points of a Holder probe: the lattice lo + m * spacing inside the box
/// [lo, hi]. Stencil points must also lie in the box and pass `admissible`.
struct HolderRegion {
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};
  double spacing = 0.0;
  std::vector<Point> directions{{1.0, 0.0}};
  std::function<bool(const Point&)> admissible;
};

struct HolderEstimate {
  double exponent = 0.0;
  double constant = 0.0;
  int k_used = 1;
  std::vector<double> steps;
  std::vector<double> sups;
  double r2 = 0.0;
  bool saturated = false;
  /// Raw least-squares slope before clamping to the probe order.
  double raw_slope = 0.0;
  nlohmann::json to_json() const;
};

/// M(h) = sup |Delta_h^k f| over the region for h = steps[j]; the exponent is
/// the least-squares slope of log M against log h. Levels with M below
/// `noise_floor` are dropped; if fewer than two remain the estimate is
/// saturated with exponent k.
HolderEstimate estimate_holder(const Field& f, const HolderRegion& region, int k, const std::vector<double>& steps,
                               double noise_floor = 1e-13);
/// Steps h0 * 2^j, j = 0..levels-1.
std::vector<double> dyadic_steps(double h0, int levels);

struct DsExpansion {
  Point z{0.0, 0.0};
  int degree = 0;
  double radius = 0.0;
  std::vector<std::array<int, 2>> multi_indices;
  std::vector<double> coefficients;
  double residual_sup = 0.0;
  double u_sup = 0.0;
  /// max_a |<residual, basis_a>| / (|residual| |basis_a|).
  double orthogonality = 0.0;
  std::size_t nodes = 0;

  /// Q(x) = sum_a q_a (x - z)^a.
  double polynomial(const Point& x) const;
  nlohmann::json to_json() const;
};

/// Least squares of u - Q d^s over grid nodes in B_r(z) with d > 0.
/// Monomials are taken in (x - z) / r and unscaled afterwards.
DsExpansion fit_ds_expansion(const GridFunction& u, const RegularizedDistance& d, double s, const Point& z, double r,
                             int degree);

struct DecayFit {
  double fitted_decay = 0.0;
  double r2 = 0.0;
  bool saturated = false;
  /// Slope of log |q_r - q_{r/2}| against log r per multi-index (NaN when all
  /// differences are at the noise floor).
  std::vector<double> coefficient_exponents;
  bool coefficients_stable = true;
  nlohmann::json to_json() const;
};

/// Slope of log residual_sup against log r over expansions at shrinking radii.
DecayFit verify_expansion_decay(const std::vector<DsExpansion>& expansions);

/// Holder probe of u1 / u2 on region nodes inside the domain. Nodes next to
/// the boundary take the ratio of local d^s projections instead of the raw
/// quotient. Throws NondegeneracyViolated if u2 < c1 d^s somewhere in the region.
struct QuotientResult {
  HolderEstimate estimate;
  GridFunction quotient;
};
QuotientResult quotient_regularity(const GridFunction& u1, const GridFunction& u2, const RegularizedDistance& d,
                                   double s, double c1, const HolderRegion& region, int k,
                                   const std::vector<double>& steps);

struct LdsDecayResult {
  int j = 0;
  Point z{0.0, 0.0};
  Point direction{0.0, 0.0};
  std::vector<double> distances;
  std::vector<double> values;  // L(eta d^s) for j = 0, |D L(eta d^s)| for j = 1
  double sup_abs = 0.0;
  double exponent = 0.0;
  double r2 = 0.0;
  double predicted = 0.0;
  /// max(options floor, 8 x the change under a doubled-order quadrature).
  double noise_floor = 0.0;
  std::optional<HolderEstimate> holder;
  Verdict verdict = Verdict::inconclusive;
  std::string note;
  nlohmann::json to_json() const;
};

struct LdsOptions {
  QuadratureScheme quadrature;
  /// Approach direction into the domain; the inward normal when unset.
  std::optional<Point> direction;
  /// Values below this are treated as quadrature noise.
  double noise_floor = 1e-6;
  /// Exponent slack for the j = 1 check and the j = 0 Holder threshold.
  double tolerance = 0.2;
  double holder_threshold = 0.5;
};

/// Samples L(eta d^s) at z + t * direction for the given distances t (d is
/// the closed-form regularized distance of the domain). j = 0: bounded and
/// Holder continuous up to the boundary (k = 1 probe along the line, plus
/// the slope of log |L| against log t). j = 1: slope of |D L| against
/// log t compared with beta - 2 - s.
LdsDecayResult verify_lds_decay(const Domain& domain, const HomogeneousKernel& K, const ClosedForm& eta, int j,
                                const Point& z, const std::vector<double>& distances, const LdsOptions& opt);

struct RegularityReport {
  std::string target;
  nlohmann::json inputs;
  nlohmann::json exponents;
  nlohmann::json constants;
  double r2 = 0.0;
  Verdict verdict = Verdict::inconclusive;
  nlohmann::json to_json() const;
};

}  // namespace freebnd
