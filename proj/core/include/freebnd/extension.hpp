#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "freebnd/grid_function.hpp"
#include "freebnd/kernel.hpp"
#include "freebnd/quadrature.hpp"

namespace freebnd {

/// a_{n,s} = 2^{2s-1} Gamma(s) / Gamma(1-s), the constant in
/// (-Delta)^s u = -a_{n,s} lim y^{1-2s} d_y u~.
double extension_constant(double s);

/// Poisson extension of a one-dimensional grid function, sampled at the grid
/// nodes for each height: values[k][i] = u~(x_i, heights[k]).
struct ExtensionField {
  GridSpec grid;
  std::vector<double> heights;
  std::vector<std::vector<double>> values;
  double s = 0.5;
  /// Per-height factor c(y) with c(y) * int y^{2s} / (x^2+y^2)^{1/2+s} dx = 1.
  std::vector<double> normalization;

  nlohmann::json sidecar() const;
};

/// Unnormalized mass int_R y^{2s} / (x^2 + y^2)^{1/2+s} dx, by quadrature.
double poisson_mass(double s, double y);

/// u~(x, y) = int P(x - x', y) u(x') dx' with the piecewise linear interpolant
/// of u (virtual exterior ring included) inside and the exterior closed form
/// outside; the kernel is normalized to unit mass at every height.
ExtensionField poisson_extend(const GridFunction& u, const std::vector<double>& heights, double s);
/// The same integral at one arbitrary point.
double poisson_value(const GridFunction& u, double s, double x, double y);

/// Heights y_min * ratio^k, k = 0..count-1 (defaults 2h and 2^{1/4}).
std::vector<double> geometric_heights(double y_min, double ratio, int count);

/// Fits u~(x_i, y) = c0 + A y^{2s} + B y^2 + C y^{2+2s} over the heights and
/// returns -a * 2s * A, the limit of -a y^{1-2s} d_y u~. `a` defaults to
/// extension_constant(s).
GridFunction neumann_trace(const ExtensionField& field, double a = 0.0);

/// Max over interior stencils of |Delta_x u~ + u~_yy + (1-2s)/y u~_y|.
double weighted_harmonicity_residual(const ExtensionField& field);

/// Least-squares factor a with a * raw_trace ~ L u on the central half of the
/// grid for u a Gaussian exp(-x^2), L the fractional Laplacian with the
/// analytic constant. Should reproduce extension_constant(s).
struct Calibration {
  double a_fit = 0.0;
  double a_analytic = 0.0;
  double c_ns = 0.0;
  double max_rel_mismatch = 0.0;
  nlohmann::json to_json() const;
};
Calibration calibrate_extension_constant(double s, double h, const QuadratureScheme& q);

struct HalflineFit {
  std::vector<double> coefficients;  // p(x) = sum_k c_k x^k
  double residual = 0.0;             // sup |u/x^s - p| / sup |u/x^s|
  bool liouville_form = false;       // residual <= 1e-6
  nlohmann::json to_json() const;
};

/// Least squares of u(x)/x^s against 1, x, ..., x^k on samples with x > 0.
HalflineFit fit_halfline_profile(const std::vector<double>& x, const std::vector<double>& u, double s, int k);
/// Grid overload: uses nodes with 0 < x <= X.
HalflineFit fit_halfline_profile(const GridFunction& u, double X, double s, int k);

}  // namespace freebnd
