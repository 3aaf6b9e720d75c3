#include "operator_oracle.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

double gaussian_second_difference(double x, double r) {
  if (r > 1.0) return 2.0 * std::exp(-x * x) - std::exp(-(x + r) * (x + r)) - std::exp(-(x - r) * (x - r));
  const double sh = std::sinh(x * r);
  // e^{-r^2} cosh(2xr) - 1 = expm1(-r^2) cosh(2xr) + 2 sinh^2(xr)
  return -2.0 * std::exp(-x * x) * (std::expm1(-r * r) * std::cosh(2.0 * x * r) + 2.0 * sh * sh);
}

double fractional_laplacian_1d(const SecondDifference& delta, double s, double x) {
  const double c = s * std::pow(4.0, s) * std::tgamma(0.5 + s) / (std::sqrt(std::numbers::pi) * std::tgamma(1.0 - s));
  const auto f = [&](double r) {
    // Below 1e-100 the integrand is O(r^{1-2s}) and its contribution is far below round-off.
    return r > 1e-100 ? delta(x, r) * std::pow(r, -1.0 - 2.0 * s) : 0.0;
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  const double near = ts.integrate(f, 0.0, 1.0, 1e-14);
  const double far = es.integrate([&](double t) { return f(1.0 + t); }, 1e-14);
  return c * (near + far);
}

}  // namespace oracle
