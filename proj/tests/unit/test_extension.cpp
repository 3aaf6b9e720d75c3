#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "freebnd/extension.hpp"
#include "freebnd/operator.hpp"
#include "operator_oracle.hpp"

using namespace freebnd;

namespace {

GridFunction sampled(const ClosedForm& f, double lo, double hi, double h) {
  return GridFunction::sample(GridSpec::covering(1, {lo, 0.0}, {hi, 0.0}, h), f, Exterior::closed_form(f));
}

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Extension, ConstantsMatchGammaForms) {
  EXPECT_NEAR(extension_constant(0.5), 1.0, 1e-14);
  for (double s : {0.2, 0.5, 0.8}) {
    // int y^{2s} (x^2+y^2)^{-1/2-s} dx = B(1/2, s) for every y.
    const double beta = std::sqrt(std::numbers::pi) * std::tgamma(s) / std::tgamma(0.5 + s);
    for (double y : {1e-3, 0.37, 20.0}) EXPECT_NEAR(poisson_mass(s, y), beta, 1e-10 * beta);
  }
}

TEST(Extension, KernelHasUnitMass) {
  const auto u = sampled(ClosedForm::from_tag("constant", {1.0}, 1), -1.0, 1.0, 1.0 / 32.0);
  for (double s : {0.3, 0.5, 0.8}) {
    const auto ext = poisson_extend(u, {0.01, 0.1, 1.0, 10.0}, s);
    for (std::size_t k = 0; k < ext.heights.size(); ++k) {
      EXPECT_NEAR(ext.normalization[k] * poisson_mass(s, ext.heights[k]), 1.0, 1e-14);
      for (double v : ext.values[k]) EXPECT_NEAR(v, 1.0, 1e-9);
    }
  }
}

TEST(Extension, ConstantHasZeroTrace) {
  const auto u = sampled(ClosedForm::from_tag("constant", {1.0}, 1), -1.0, 1.0, 1.0 / 32.0);
  const auto tr = neumann_trace(poisson_extend(u, geometric_heights(2.0 / 32.0, std::pow(2.0, 0.25), 12), 0.3));
  EXPECT_LE(sup_abs(tr.values()), 1e-7);
}

TEST(Extension, HalfPowerIsClassicalHarmonicExtension) {
  const auto hp = ClosedForm::from_tag("halfspace_power", {0.5, 1.0, 0.0}, 1);
  const auto u = sampled(hp, -4.0, 4.0, 1.0 / 128.0);
  EXPECT_NEAR(poisson_value(u, 0.5, 0.0, 1.0), std::cos(std::numbers::pi / 4.0), 1e-3);
  // r^{1/2} cos(theta/2) at other points of the upper half-plane.
  for (const auto& [x, y] : {std::pair{0.5, 0.25}, std::pair{-0.7, 0.4}}) {
    const double r = std::hypot(x, y), th = std::atan2(y, x);
    EXPECT_NEAR(poisson_value(u, 0.5, x, y), std::sqrt(r) * std::cos(0.5 * th), 1e-3);
  }
}

TEST(Extension, GaussianTraceMatchesOperator) {
  const double s = 0.5, h = 1.0 / 256.0;
  const auto ga = ClosedForm::from_tag("gaussian", {1.0, 1.0}, 1);
  const auto u = sampled(ga, -4.0, 4.0, h);
  const auto tr = neumann_trace(poisson_extend(u, geometric_heights(2.0 * h, std::pow(2.0, 0.25), 12), s));
  const auto K = HomogeneousKernel::fractional_laplacian(1, s);
  QuadratureScheme q;
  q.inner_cutoff = 0.05;
  q.truncation_radius = 8.0;
  const ClosedFormField f(ga);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < u.grid().size(); i += 4) {
    const double x = u.grid().node(i)[0];
    if (std::abs(x) > 2.0) continue;
    const double ref = eval_operator(f, K, {x, 0.0}, q);
    const double independent = oracle::fractional_laplacian_1d(oracle::gaussian_second_difference, s, x);
    EXPECT_NEAR(ref, independent, 1e-4);
    err = std::max(err, std::abs(tr[i] - ref));
    scale = std::max(scale, std::abs(ref));
  }
  EXPECT_LE(err / scale, 1e-2);
}

TEST(Extension, HalfPowerTraceIsSmallAwayFromOrigin) {
  const auto hp = ClosedForm::from_tag("halfspace_power", {0.5, 1.0, 0.0}, 1);
  double prev = std::numeric_limits<double>::infinity();
  for (double h : {1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0}) {
    const auto u = sampled(hp, -4.0, 4.0, h);
    const auto tr = neumann_trace(poisson_extend(u, geometric_heights(2.0 * h, std::pow(2.0, 0.25), 12), 0.5));
    double m = 0.0;
    for (std::size_t i = 0; i < u.grid().size(); ++i) {
      const double x = u.grid().node(i)[0];
      if (x > 0.1 && x < 3.9) m = std::max(m, std::abs(tr[i]));
    }
    EXPECT_LT(m, prev) << "h=" << h;
    prev = m;
  }
  EXPECT_LE(prev, 1e-2);
}

TEST(Extension, HarmonicityResidualFallsUnderRefinement) {
  const auto ga = ClosedForm::from_tag("gaussian", {1.0, 1.0}, 1);
  std::vector<double> res;
  for (double h : {1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0}) {
    const auto u = sampled(ga, -4.0, 4.0, h);
    const auto ext = poisson_extend(u, geometric_heights(0.25, 1.0 + 4.0 * h, 8), 0.3);
    res.push_back(weighted_harmonicity_residual(ext));
  }
  // Second order: each halving cuts the residual by about 4.
  EXPECT_LE(res[1], res[0] / 3.0);
  EXPECT_LE(res[2], res[1] / 3.0);
}

TEST(Extension, SemigroupAtHalf) {
  // For s = 1/2 the extension is the classical Poisson semigroup.
  const double h = 1.0 / 64.0, y1 = 0.2, y2 = 0.3;
  const auto ga = ClosedForm::from_tag("gaussian", {1.0, 1.0}, 1);
  const auto u = sampled(ga, -12.0, 12.0, h);
  const auto first = poisson_extend(u, {y1, y1 + y2}, 0.5);
  const GridFunction slice(u.grid(), first.values[0], Exterior::zero());
  const auto second = poisson_extend(slice, {y2}, 0.5);
  for (std::size_t i = 0; i < u.grid().size(); ++i) {
    if (std::abs(u.grid().node(i)[0]) > 2.0) continue;
    EXPECT_NEAR(second.values[0][i], first.values[1][i], 5e-4);
  }
}

TEST(Extension, TraceIsLinear) {
  const double h = 1.0 / 64.0;
  const auto ga = ClosedForm::from_tag("gaussian", {1.0, 1.0}, 1);
  const auto gb = ClosedForm::from_tag("gaussian", {2.0, 0.5}, 1);
  const auto grid = GridSpec::covering(1, {-3.0, 0.0}, {3.0, 0.0}, h);
  const auto heights = geometric_heights(2.0 * h, std::pow(2.0, 0.25), 12);
  const GridFunction u = GridFunction::sample(grid, ga, Exterior::zero());
  const GridFunction v = GridFunction::sample(grid, gb, Exterior::zero());
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 2.5 * u[i] - 0.75 * v[i];
  const GridFunction uw(grid, w, Exterior::zero());
  const auto tu = neumann_trace(poisson_extend(u, heights, 0.4));
  const auto tv = neumann_trace(poisson_extend(v, heights, 0.4));
  const auto tw = neumann_trace(poisson_extend(uw, heights, 0.4));
  const double scale = sup_abs(tw.values());
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(tw[i], 2.5 * tu[i] - 0.75 * tv[i], 1e-12 * scale);
}

TEST(Extension, TooFewHeights) {
  const auto u = sampled(ClosedForm::from_tag("constant", {1.0}, 1), -1.0, 1.0, 1.0 / 8.0);
  const auto ext = poisson_extend(u, {0.1, 0.2}, 0.5);
  EXPECT_EQ(code_of([&] { neumann_trace(ext); }), ErrorCode::ExtrapolationUnstable);
}

TEST(Extension, ExteriorPolicyRequired) {
  const auto grid = GridSpec::covering(1, {-1.0, 0.0}, {1.0, 0.0}, 1.0 / 8.0);
  const GridFunction u(grid, std::vector<double>(grid.size(), 1.0), Exterior::none());
  EXPECT_EQ(code_of([&] { poisson_extend(u, {0.1}, 0.5); }), ErrorCode::NonIntegrableTail);
}

TEST(Extension, CalibrationReproducesAnalyticConstant) {
  QuadratureScheme q;
  q.inner_cutoff = 0.05;
  q.truncation_radius = 8.0;
  for (double s : {0.3, 0.7}) {
    const auto c = calibrate_extension_constant(s, 1.0 / 128.0, q);
    EXPECT_NEAR(c.a_fit / c.a_analytic, 1.0, 1e-2) << "s=" << s;
    EXPECT_LE(c.max_rel_mismatch, 2e-2);
  }
}

TEST(Liouville, ExactProfiles) {
  const double s = 0.35;
  std::vector<double> x, u1, u2;
  for (int i = 1; i <= 400; ++i) {
    x.push_back(i / 400.0);
    u1.push_back(std::pow(x.back(), s));
    u2.push_back((3.0 + 2.0 * x.back()) * std::pow(x.back(), s));
  }
  const auto f1 = fit_halfline_profile(x, u1, s, 2);
  EXPECT_NEAR(f1.coefficients[0], 1.0, 1e-10);
  EXPECT_LE(f1.residual, 1e-10);
  EXPECT_TRUE(f1.liouville_form);
  const auto f2 = fit_halfline_profile(x, u2, s, 2);
  EXPECT_NEAR(f2.coefficients[0], 3.0, 1e-8);
  EXPECT_NEAR(f2.coefficients[1], 2.0, 1e-8);
  EXPECT_NEAR(f2.coefficients[2], 0.0, 1e-8);
  EXPECT_TRUE(f2.liouville_form);
}

TEST(Liouville, WrongPowerIsRejected) {
  for (double s : {0.2, 0.5, 0.8}) {
    const auto grid = GridSpec::covering(1, {-0.5, 0.0}, {1.0, 0.0}, 1.0 / 512.0);
    const auto u = GridFunction::sample(grid, ClosedForm::from_tag("halfspace_power", {s + 0.3, 1.0, 0.0}, 1),
                                        Exterior::zero());
    for (int k = 0; k <= 2; ++k) {
      const auto fit = fit_halfline_profile(u, 1.0, s, k);
      EXPECT_GE(fit.residual, 0.05) << "s=" << s << " k=" << k;
      EXPECT_FALSE(fit.liouville_form);
    }
  }
}

TEST(Liouville, SingularInputs) {
  EXPECT_EQ(code_of([] { fit_halfline_profile({0.5}, {1.0}, 0.5, 2); }), ErrorCode::SingularFit);
  EXPECT_EQ(code_of([] { fit_halfline_profile({0.0, 0.5, 1.0}, {0.0, 1.0, 1.0}, 0.5, 1); }), ErrorCode::SingularFit);
}
