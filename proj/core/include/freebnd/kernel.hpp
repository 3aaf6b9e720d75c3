#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "freebnd/common.hpp"

namespace freebnd {

/// c_{n,s} = s 4^s Gamma(n/2+s) / (pi^{n/2} Gamma(1-s)), the constant for
/// which K = c_{n,s} |y|^{-n-2s} gives the fractional Laplacian.
double fractional_laplacian_constant(int dim, double s);

/// (-Delta)^s exp(-|x|^2) = 4^s Gamma(n/2+s)/Gamma(n/2) 1F1(n/2+s; n/2; -|x|^2).
double gaussian_fractional_laplacian(int dim, double s, double r2);

/// K(y) = a(y/|y|) / |y|^{n+2s} with an even angular density a.
///
/// In two dimensions a tabulated density is given at M uniformly spaced
/// angles theta_k = angles[0] + 2 pi k / M and interpolated linearly
/// (periodically) in between. In one dimension the sphere is {-1, +1} and the
/// density is a single number.
class HomogeneousKernel {
 public:
  enum class Form { fractional_laplacian, table };

  static HomogeneousKernel fractional_laplacian(int dim, double s);
  static HomogeneousKernel fractional_laplacian(int dim, double s, double normalization);
  static HomogeneousKernel table(int dim, double s, std::vector<double> angles, std::vector<double> values,
                                 double lambda, double Lambda);
  /// {dim, s, form: "frac-laplacian" | "table", angles, values, lambda, Lambda,
  /// normalization (frac-laplacian only, optional)}
  static HomogeneousKernel from_json(const nlohmann::json& j);

  int dim() const { return dim_; }
  double s() const { return s_; }
  Form form() const { return form_; }
  bool isotropic() const { return form_ == Form::fractional_laplacian; }
  double lambda() const { return lambda_; }
  double Lambda() const { return Lambda_; }

  /// a(theta) for the unit vector (cos theta, sin theta); theta is ignored in 1D.
  double angular(double theta) const;
  double angular(const Point& unit) const;
  double operator()(const Point& y) const;

  nlohmann::json to_json() const;

 private:
  HomogeneousKernel() = default;
  void check_invariants() const;

  int dim_ = 1;
  double s_ = 0.5;
  Form form_ = Form::fractional_laplacian;
  double lambda_ = 1.0;
  double Lambda_ = 1.0;
  double theta0_ = 0.0;
  std::vector<double> values_;
};

}  // namespace freebnd
