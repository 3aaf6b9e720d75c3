#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "freebnd/operator.hpp"

namespace freebnd {

/// min{Lv, v - phi} = 0 on the grid, v = 0 outside it.
struct ObstacleProblem {
  HomogeneousKernel kernel;
  GridFunction phi;
  QuadratureScheme quadrature;

  /// Throws InvalidArgument unless phi is finite and {phi > 0} keeps at least
  /// 10 cells away from the grid edge.
  void validate() const;
};

struct SolverOptions {
  double omega = 1.5;
  double tol = 1e-10;
  int max_iter = 200000;
};

struct ObstacleResiduals {
  double complementarity = 0.0;     // max |min(v - phi, Av)|
  double negative_Lv = 0.0;         // max (-Av)_+
  double inactive_Lv = 0.0;         // max |Av| where v > phi + 10 tol
  double obstacle_violation = 0.0;  // max (phi - v)_+
  nlohmann::json to_json() const;
};

struct ObstacleSolution {
  GridFunction v;
  std::vector<char> active;
  std::vector<double> Av;
  ObstacleResiduals residuals;
  int iterations = 0;
  double tol = 0.0;
};

class ObstacleNoConvergence : public Error {
 public:
  ObstacleNoConvergence(const std::string& message, ObstacleSolution best)
      : Error(ErrorCode::NoConvergence, message), best_(std::move(best)) {}
  const ObstacleSolution& best() const { return best_; }

 private:
  ObstacleSolution best_;
};

/// Projected SOR with alternating forward/backward sweeps,
/// v_i <- max(phi_i, v_i - omega (Av)_i / A_ii), until the complementarity
/// residual is <= tol.
ObstacleSolution solve_obstacle(const ObstacleProblem& p, const SolverOptions& opt);
ObstacleSolution solve_obstacle(const DenseMatrix& A, const GridFunction& phi, const SolverOptions& opt);

enum class PointClass { regular, degenerate, undetermined };
const char* to_string(PointClass c);

struct FreeBoundaryPoint {
  Point location{0.0, 0.0};
  Point normal{0.0, 0.0};
  PointClass classification = PointClass::undetermined;
  double growth_exponent = 0.0;
  double fit_r2 = 0.0;
  nlohmann::json to_json() const;
};

/// Sub-grid crossings of v - phi - 10 tol along grid edges.
std::vector<FreeBoundaryPoint> extract_free_boundary(const ObstacleSolution& sol, const GridFunction& phi,
                                                     double eps_grad = 1e-9);

struct GrowthFit {
  double exponent = 0.0;
  double r2 = 0.0;
  std::vector<double> radii;
  std::vector<double> sups;
};

/// Slope of log sup_{B_r(x0)} w against log r over grid nodes.
GrowthFit growth_exponent(const GridFunction& w, const Point& x0, const std::vector<double>& radii);
PointClass classify_growth(double exponent, double r2, double s);
/// Radii 4h, 8h, ... that stay inside the grid around x0.
std::vector<double> default_radii(const GridSpec& grid, const Point& x0, int max_levels = 6);

FreeBoundaryPoint classify_point(const ObstacleSolution& sol, const GridFunction& phi, double s,
                                 FreeBoundaryPoint x0, const std::vector<double>& radii);

/// nu = grad w / |grad w| by central differences with the grid step.
Point compute_normal(const GridFunction& w, const Point& x, double eps_grad = 1e-9);

/// w = v - phi on the grid (zero exterior).
GridFunction gap_function(const ObstacleSolution& sol, const GridFunction& phi);
/// d/dx_axis of a gap function: zero on {w <= threshold}, second-order
/// one-sided differences next to that set and at the grid edge, central
/// differences elsewhere.
GridFunction differentiate_gap(const GridFunction& w, int axis, double threshold);
GridFunction differentiate_solution(const ObstacleSolution& sol, const GridFunction& phi, int axis);

}  // namespace freebnd
