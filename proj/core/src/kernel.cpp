#include "freebnd/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/hypergeometric_1F1.hpp>

namespace freebnd {

double fractional_laplacian_constant(int dim, double s) {
  const double n = dim;
  return s * std::pow(4.0, s) * std::tgamma(0.5 * n + s) /
         (std::pow(std::numbers::pi, 0.5 * n) * std::tgamma(1.0 - s));
}

double gaussian_fractional_laplacian(int dim, double s, double r2) {
  const double a = 0.5 * dim;
  return std::pow(4.0, s) * std::tgamma(a + s) / std::tgamma(a) * boost::math::hypergeometric_1F1(a + s, a, -r2);
}

HomogeneousKernel HomogeneousKernel::fractional_laplacian(int dim, double s) {
  if (!(s > 0.0 && s < 1.0)) throw Error(ErrorCode::InvalidArgument, "kernel order s must lie in (0,1)");
  return fractional_laplacian(dim, s, fractional_laplacian_constant(dim, s));
}

HomogeneousKernel HomogeneousKernel::fractional_laplacian(int dim, double s, double normalization) {
  HomogeneousKernel k;
  k.dim_ = dim;
  k.s_ = s;
  k.form_ = Form::fractional_laplacian;
  k.values_ = {normalization};
  k.lambda_ = k.Lambda_ = normalization;
  k.check_invariants();
  return k;
}

HomogeneousKernel HomogeneousKernel::table(int dim, double s, std::vector<double> angles,
                                           std::vector<double> values, double lambda, double Lambda) {
  HomogeneousKernel k;
  k.dim_ = dim;
  k.s_ = s;
  k.form_ = Form::table;
  k.lambda_ = lambda;
  k.Lambda_ = Lambda;
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "kernel table has no values");
  if (dim == 1) {
    if (values.size() > 2) throw Error(ErrorCode::InvalidArgument, "1D kernel table has at most two values");
    if (values.size() == 2 && std::abs(values[0] - values[1]) > 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "1D kernel must be even: a(-1) != a(+1)");
    }
    values.resize(1);
  } else {
    const std::size_t m = values.size();
    if (m % 2 != 0) {
      throw Error(ErrorCode::InvalidArgument, "2D kernel table needs an even number of uniform angles");
    }
    if (!angles.empty()) {
      if (angles.size() != m) throw Error(ErrorCode::InvalidArgument, "kernel angles/values length mismatch");
      const double step = 2.0 * std::numbers::pi / static_cast<double>(m);
      for (std::size_t i = 1; i < m; ++i) {
        if (std::abs(angles[i] - angles[0] - step * static_cast<double>(i)) > 1e-9) {
          throw Error(ErrorCode::InvalidArgument, "kernel table angles must be uniformly spaced over the circle");
        }
      }
      k.theta0_ = angles[0];
    }
    for (std::size_t i = 0; i < m / 2; ++i) {
      if (std::abs(values[i] - values[i + m / 2]) > 1e-12) {
        throw Error(ErrorCode::InvalidArgument,
                    "kernel must be even: a(theta) != a(theta + pi) at table index " + std::to_string(i));
      }
    }
  }
  k.values_ = std::move(values);
  k.check_invariants();
  return k;
}

void HomogeneousKernel::check_invariants() const {
  if (dim_ != 1 && dim_ != 2) throw Error(ErrorCode::InvalidArgument, "kernel dim must be 1 or 2");
  if (!(s_ > 0.0 && s_ < 1.0)) throw Error(ErrorCode::InvalidArgument, "kernel order s must lie in (0,1)");
  if (!(lambda_ > 0.0) || !(Lambda_ >= lambda_)) {
    throw Error(ErrorCode::InvalidArgument, "kernel ellipticity bounds need 0 < lambda <= Lambda");
  }
  for (double a : values_) {
    if (!std::isfinite(a) || a < lambda_ * (1.0 - 1e-12) || a > Lambda_ * (1.0 + 1e-12)) {
      throw Error(ErrorCode::InvalidArgument, "kernel density value " + std::to_string(a) +
                                                  " outside [lambda, Lambda]");
    }
  }
}

HomogeneousKernel HomogeneousKernel::from_json(const nlohmann::json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    const double s = j.at("s").get<double>();
    const std::string form = j.value("form", std::string("frac-laplacian"));
    if (form == "frac-laplacian") {
      if (j.contains("normalization")) return fractional_laplacian(dim, s, j.at("normalization").get<double>());
      return fractional_laplacian(dim, s);
    }
    if (form == "table") {
      auto values = j.at("values").get<std::vector<double>>();
      auto angles = j.value("angles", std::vector<double>{});
      const double lo = j.at("lambda").get<double>();
      const double hi = j.at("Lambda").get<double>();
      return table(dim, s, std::move(angles), std::move(values), lo, hi);
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown kernel form '" + form + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("kernel block: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    throw Error(ErrorCode::ConfigInvalid, std::string("kernel block: ") + e.what());
  }
}

double HomogeneousKernel::angular(double theta) const {
  if (values_.size() == 1) return values_[0];
  const double m = static_cast<double>(values_.size());
  double t = (theta - theta0_) / (2.0 * std::numbers::pi) * m;
  t -= m * std::floor(t / m);
  const auto i0 = static_cast<std::size_t>(std::floor(t)) % values_.size();
  const std::size_t i1 = (i0 + 1) % values_.size();
  const double f = t - std::floor(t);
  return (1.0 - f) * values_[i0] + f * values_[i1];
}

double HomogeneousKernel::angular(const Point& unit) const {
  if (values_.size() == 1) return values_[0];
  return angular(std::atan2(unit[1], unit[0]));
}

double HomogeneousKernel::operator()(const Point& y) const {
  const double r = dim_ == 1 ? std::abs(y[0]) : norm(y);
  if (r == 0.0) return std::numeric_limits<double>::infinity();
  return angular((1.0 / r) * y) * std::pow(r, -(dim_ + 2.0 * s_));
}

nlohmann::json HomogeneousKernel::to_json() const {
  nlohmann::json j{{"dim", dim_}, {"s", s_}};
  if (form_ == Form::fractional_laplacian) {
    j["form"] = "frac-laplacian";
    j["normalization"] = values_[0];
  } else {
    j["form"] = "table";
    j["values"] = values_;
    if (dim_ == 2) {
      std::vector<double> angles(values_.size());
      for (std::size_t i = 0; i < angles.size(); ++i) {
        angles[i] = theta0_ + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(angles.size());
      }
      j["angles"] = angles;
    }
    j["lambda"] = lambda_;
    j["Lambda"] = Lambda_;
  }
  return j;
}

}  // namespace freebnd
