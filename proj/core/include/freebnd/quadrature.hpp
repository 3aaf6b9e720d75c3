#pragma once

#include <vector>

#include <nlohmann/json.hpp>

namespace freebnd {

/// Parameters of the polar quadrature used by the operator evaluators.
///
/// The radial range [inner_cutoff, truncation_radius] is cut into
/// `radial_levels` geometric shells (0 picks dyadic shells), each shell into
/// `panels_per_shell` panels of `gauss_order` Gauss-Legendre nodes. In two
/// dimensions `angular_nodes` uniform angles are used (trapezoid rule).
struct QuadratureScheme {
  enum class TailPolicy { analytic, bound_and_drop };

  int radial_levels = 0;
  int angular_nodes = 64;
  double inner_cutoff = 0.05;
  double truncation_radius = 4.0;
  TailPolicy tail_policy = TailPolicy::analytic;
  int gauss_order = 8;
  int panels_per_shell = 2;
  /// Split radial panels at kinks reported by the field, grading toward them,
  /// and shrink the inner cutoff to at most (nearest kink distance) / kink_ratio.
  bool split_at_breakpoints = true;
  int grading_levels = 10;
  double kink_ratio = 32.0;

  void validate() const;
  static QuadratureScheme from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Gauss-Legendre rule on [-1, 1], cached per order.
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};
const GaussRule& gauss_legendre(int order);

/// Nodes and weights of a one-dimensional rule.
struct RadialRule {
  std::vector<double> r;
  std::vector<double> w;
};

/// Composite Gauss rule on [a, b] for integrands f(r) r^{-power}: the
/// returned weights include the factor r^{-power}. Panels have geometric
/// boundaries (`shells` of them, each split into `panels` equal pieces);
/// `kinks` inside (a, b) become extra boundaries with `grading` geometric
/// refinements (ratio 1/4) on both sides.
RadialRule radial_rule(double a, double b, int shells, int panels, int order, double power,
                       const std::vector<double>& kinks = {}, int grading = 0);

}  // namespace freebnd
