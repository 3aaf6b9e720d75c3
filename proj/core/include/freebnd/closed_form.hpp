#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "freebnd/common.hpp"

namespace freebnd {

/// A function of R^n known in closed form, optionally reporting where it
/// fails to be smooth along a ray.
///
/// Forms built from a registered tag (see `ClosedForm::from_tag`) round-trip
/// through JSON; forms built from a lambda carry the tag "custom" and do not.
///
/// Registered tags, with parameters listed for dim = 2 (drop the second
/// coordinate of every vector in dim = 1):
///   zero                 []
///   constant             [c]
///   linear               [c0, g1, g2]               c0 + g.x
///   gaussian             [A, a]                     A exp(-a|x|^2)
///   paraboloid           [c0, a]                    c0 - a|x|^2
///   radial_power         [p, c1, c2]                |x - c|^p
///   halfspace_power      [p, e1, e2, offset]        ((x.e - offset)_+)^p
///   ball_torsion_power   [p, R, c1, c2]             ((R^2 - |x-c|^2)_+ / (2n))^p
class ClosedForm {
 public:
  using ValueFn = std::function<double(const Point&)>;
  /// Appends the distances t > 0 at which t -> f(x + t dir) has a kink.
  using BreakFn = std::function<void(const Point& x, const Point& dir, std::vector<double>& out)>;

  ClosedForm();
  ClosedForm(std::string tag, std::vector<double> params, int dim, ValueFn value, BreakFn breaks = {});

  static ClosedForm from_tag(const std::string& tag, std::vector<double> params, int dim);
  static ClosedForm custom(int dim, ValueFn value, BreakFn breaks = {});
  static ClosedForm from_json(const nlohmann::json& j, int dim);

  double operator()(const Point& x) const { return value_(x); }
  void ray_breakpoints(const Point& x, const Point& dir, std::vector<double>& out) const {
    if (breaks_) breaks_(x, dir, out);
  }

  const std::string& tag() const { return tag_; }
  const std::vector<double>& params() const { return params_; }
  int dim() const { return dim_; }
  bool serializable() const { return tag_ != "custom" && tag_ != "product"; }
  bool is_zero() const { return tag_ == "zero"; }
  nlohmann::json to_json() const;

  /// Pointwise product; breakpoints are the union of both factors'.
  friend ClosedForm operator*(const ClosedForm& a, const ClosedForm& b);

 private:
  std::string tag_;
  std::vector<double> params_;
  int dim_ = 1;
  ValueFn value_;
  BreakFn breaks_;
};

}  // namespace freebnd
