#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "freebnd/closed_form.hpp"
#include "freebnd/grid_function.hpp"

namespace freebnd {

/// Computational domain. Graph domains are {profile(x1) < x2 < top} and are
/// periodic in x1 with period x1_hi - x1_lo, so their boundary is the graph
/// together with the top edge.
class Domain {
 public:
  enum class Tag { interval, disk, half_space, graph };

  static Domain interval(double a, double b);
  static Domain disk(const Point& center, double radius);
  /// {x . e > offset}; `lo`/`hi` give the box used when a grid is needed.
  static Domain half_space(int dim, const Point& e, double offset, const Point& lo, const Point& hi);
  static Domain graph(double x1_lo, double x1_hi, std::vector<double> profile, double beta, double top);
  /// {tag, ...}. interval: a, b. disk: center, radius. half_space: dim,
  /// normal, offset, box_lo, box_hi. graph: x_lo, x_hi, top, beta and either
  /// samples or profile {tag, params} (sampled at `samples_count` points).
  static Domain from_json(const nlohmann::json& j);

  Tag tag() const { return tag_; }
  std::string tag_name() const;
  int dim() const { return dim_; }
  /// Smoothness label of the boundary; infinity for the analytic shapes.
  double beta() const { return beta_; }
  Point box_lo() const { return lo_; }
  Point box_hi() const { return hi_; }

  bool contains(const Point& x) const;
  /// Euclidean distance to the boundary, negative outside.
  double signed_distance(const Point& x) const;
  /// Distance t in (0, limit] from x to the boundary along axis `axis` in
  /// direction `sign`, or a value > limit if the boundary is not met.
  double axis_crossing(const Point& x, int axis, int sign, double limit) const;
  /// Unit normal pointing into the domain at (or near) the boundary point z.
  Point inward_normal(const Point& z) const;
  /// Profile value for graph domains.
  double profile(double x1) const;
  double period() const { return hi_[0] - lo_[0]; }

  /// The torsion function in closed form (interval, disk) or the distance
  /// itself (half-space, where the torsion function does not exist).
  std::optional<ClosedForm> closed_form_distance() const;
  /// Width of the thinnest part of the domain.
  double thinnest_feature() const;

  nlohmann::json to_json() const;

 private:
  Tag tag_ = Tag::interval;
  int dim_ = 1;
  double beta_ = 0.0;
  Point lo_{0.0, 0.0};
  Point hi_{1.0, 0.0};
  Point center_{0.0, 0.0};
  double radius_ = 1.0;
  Point normal_{1.0, 0.0};
  double offset_ = 0.0;
  double top_ = 0.0;
  std::vector<double> profile_;
};

double dist_to_boundary(const Domain& domain, const Point& x);

struct RegularizedDistance {
  enum class Mode { closed_form, torsion_solve };

  Domain domain;
  GridFunction field;
  double C_cmp = 1.0;
  Mode mode = Mode::closed_form;
  std::optional<ClosedForm> form;
  int iterations = 0;
  double residual = 0.0;

  nlohmann::json describe() const;
};

/// d solving -Delta d = 1 in the domain, d = 0 outside. Uses the closed form
/// when one exists unless `force_solve`; otherwise SOR on the 3/5-point
/// Laplacian with Shortley-Weller cut cells, iterated until the max residual
/// of the discrete equation is <= tol.
RegularizedDistance build_regularized_distance(const Domain& domain, const GridSpec& grid, double tol,
                                               bool force_solve = false, int max_iter = 200000);

/// max over interior nodes of max(d / dist, dist / d).
double comparability_constant(const Domain& domain, const GridFunction& d);

/// d^s pointwise, exactly zero outside the domain.
GridFunction d_power(const RegularizedDistance& d, double s);

}  // namespace freebnd
