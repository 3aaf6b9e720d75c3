#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "freebnd/field.hpp"
#include "freebnd/grid_function.hpp"
#include "freebnd/kernel.hpp"
#include "freebnd/operator.hpp"
#include "operator_oracle.hpp"

using namespace freebnd;

namespace {

QuadratureScheme scheme(double eps, double R) {
  QuadratureScheme q;
  q.inner_cutoff = eps;
  q.truncation_radius = R;
  return q;
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

TEST(Operator, ConstantsAreAnnihilated) {
  for (int dim : {1, 2}) {
    const auto K = HomogeneousKernel::fractional_laplacian(dim, 0.4);
    const ClosedFormField one(ClosedForm::from_tag("constant", {1.0}, dim));
    EXPECT_EQ(eval_operator(one, K, {0.3, 0.1}, scheme(0.05, 4.0)), 0.0);
  }
}

// Second differences of affine data vanish exactly except inside the Taylor
// term, where the finite-difference Hessian carries round-off of order
// 1e-16 / step^2 times eps^{2-2s}.
TEST(Operator, AffineFunctionsAreAnnihilated) {
  for (double s : {0.3, 0.7}) {
    const auto K1 = HomogeneousKernel::fractional_laplacian(1, s);
    const ClosedFormField u1(ClosedForm::from_tag("linear", {2.0, 3.0}, 1));
    EXPECT_NEAR(eval_operator(u1, K1, {0.4, 0.0}, scheme(0.05, 4.0)), 0.0, 1e-7);
    const auto K2 = HomogeneousKernel::fractional_laplacian(2, s);
    const ClosedFormField u2(ClosedForm::from_tag("linear", {1.0, -0.5, 2.0}, 2));
    EXPECT_NEAR(eval_operator(u2, K2, {0.4, -0.2}, scheme(0.05, 4.0)), 0.0, 1e-7);
  }
}

TEST(Operator, GaussianMatchesIndependentQuadrature) {
  for (double s : {0.3, 0.5, 0.7}) {
    const auto K = HomogeneousKernel::fractional_laplacian(1, s);
    const ClosedForm g = ClosedForm::from_tag("gaussian", {1.0, 1.0}, 1);
    const ClosedFormField field(g);
    const auto grid = GridSpec::covering(1, {-4.0, 0.0}, {4.0, 0.0}, 1.0 / 1024.0);
    const auto gf = GridFunction::sample(grid, g, Exterior::closed_form(g));
    for (double x : {0.0, 0.35, 0.7, 2.0}) {
      const double ref = oracle::fractional_laplacian_1d(oracle::gaussian_second_difference, s, x);
      EXPECT_NEAR(eval_operator(field, K, {x, 0.0}, scheme(0.05, 8.0)), ref, 1e-3 * std::abs(ref))
          << "field s=" << s << " x=" << x;
      EXPECT_NEAR(eval_operator(gf, K, {x, 0.0}, scheme(0.05, 8.0)), ref, 1e-3 * std::abs(ref))
          << "grid s=" << s << " x=" << x;
    }
  }
}

TEST(Operator, TwoDimensionalGaussianMatchesClosedForm) {
  const double s = 0.5;
  const auto K = HomogeneousKernel::fractional_laplacian(2, s);
  const ClosedFormField field(ClosedForm::from_tag("gaussian", {1.0, 1.0}, 2));
  for (const Point& x : {Point{0.0, 0.0}, Point{0.4, -0.3}}) {
    const double ref = gaussian_fractional_laplacian(2, s, dot(x, x));
    EXPECT_NEAR(eval_operator(field, K, x, scheme(0.05, 8.0)), ref, 1e-3 * std::abs(ref));
  }
}

TEST(Operator, HalfSpaceProfileConvergesUnderRefinement) {
  // L (x_n)_+^s = 0 in {x_n > 0}. Each level refines the cutoff, the
  // kink ratio, the angular rule and the Gauss order together.
  for (int dim : {1, 2}) {
    for (double s : {0.3, 0.5, 0.7}) {
      const auto K = HomogeneousKernel::fractional_laplacian(dim, s);
      const ClosedFormField u(ClosedForm::from_tag("halfspace_power",
                                                   dim == 1 ? std::vector<double>{s, 1.0, 0.0}
                                                            : std::vector<double>{s, 0.0, 1.0, 0.0},
                                                   dim));
      double prev = std::numeric_limits<double>::infinity();
      for (int level = 0; level < 3; ++level) {
        QuadratureScheme q = scheme(0.05 / std::pow(8.0, level), 4.0);
        q.kink_ratio = 4.0 * std::pow(8.0, level);
        q.angular_nodes = 32 << level;
        q.gauss_order = 4 + 4 * level;
        double worst = 0.0;
        for (int k = 1; k <= 10; ++k) {
          const double t = 0.1 * k;
          const Point x = dim == 1 ? Point{t, 0.0} : Point{0.3 * k - 1.5, t};
          worst = std::max(worst, std::abs(eval_operator(u, K, x, q)));
        }
        EXPECT_LT(3.0 * worst, prev) << "dim=" << dim << " s=" << s << " level=" << level;
        prev = worst;
      }
      EXPECT_LT(prev, 1e-6) << "dim=" << dim << " s=" << s;
    }
  }
}

TEST(Operator, GradientFormAgrees) {
  for (int dim : {1, 2}) {
    const auto K = HomogeneousKernel::fractional_laplacian(dim, 0.4);
    const ClosedFormField u(ClosedForm::from_tag("gaussian", {1.0, 1.0}, dim));
    const Point x{0.3, dim == 2 ? 0.2 : 0.0};
    const double a = eval_operator(u, K, x, scheme(0.05, 8.0));
    const double b = eval_operator_gradient_form(u, K, x, scheme(0.05, 8.0));
    EXPECT_NEAR(a, b, 1e-2 * std::abs(a)) << "dim=" << dim;
  }
}

TEST(Operator, OddFunctionGivesReproducibleZero) {
  const auto K = HomogeneousKernel::fractional_laplacian(1, 0.6);
  const double x0 = 0.25;
  const ClosedFormField u(ClosedForm::custom(1, [x0](const Point& p) { return std::tanh(p[0] - x0); }));
  const double a = eval_operator(u, K, {x0, 0.0}, scheme(0.05, 4.0));
  const double b = eval_operator(u, K, {x0, 0.0}, scheme(0.05, 4.0));
  EXPECT_TRUE(std::isfinite(a));
  EXPECT_EQ(a, b);
  EXPECT_NEAR(a, 0.0, 1e-12);
}

TEST(Operator, TranslationInvariance) {
  const auto K = HomogeneousKernel::fractional_laplacian(1, 0.4);
  const double h = 1.0 / 64.0, t = 37 * h;
  const auto grid = GridSpec::covering(1, {-2.0, 0.0}, {2.0, 0.0}, h);
  GridSpec shifted = grid;
  shifted.origin[0] += t;
  const ClosedForm g = ClosedForm::from_tag("gaussian", {1.0, 3.0}, 1);
  const auto u = GridFunction::sample(grid, g, Exterior::zero());
  const GridFunction v(shifted, std::vector<double>(u.values().begin(), u.values().end()), Exterior::zero());
  for (double x : {-0.5, 0.0, 0.7}) {
    const double a = eval_operator(u, K, {x, 0.0}, scheme(2 * h, 4.0));
    const double b = eval_operator(v, K, {x + t, 0.0}, scheme(2 * h, 4.0));
    EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
  }
}

TEST(Operator, ScalingHomogeneity) {
  // u_r(x) = u(r x)  =>  L u_r(x) = r^{2s} L u(r x).
  const double s = 0.35, r = 2.0;
  const auto K = HomogeneousKernel::fractional_laplacian(2, s);
  const ClosedFormField u(ClosedForm::from_tag("gaussian", {1.0, 1.0}, 2));
  const ClosedFormField ur(ClosedForm::from_tag("gaussian", {1.0, r * r}, 2));
  const Point x{0.2, 0.1};
  const double lhs = eval_operator(ur, K, x, scheme(0.05 / r, 8.0 / r));
  const double rhs = std::pow(r, 2 * s) * eval_operator(u, K, r * x, scheme(0.05, 8.0));
  EXPECT_NEAR(lhs, rhs, 1e-6 * std::abs(rhs));
}

TEST(Operator, MatrixIsSymmetricMMatrix) {
  for (int dim : {1, 2}) {
    const auto K = HomogeneousKernel::fractional_laplacian(dim, 0.4);
    const double h = dim == 1 ? 1.0 / 32.0 : 1.0 / 8.0;
    const auto grid = GridSpec::covering(dim, {-1.0, -1.0}, {1.0, 1.0}, h);
    const auto q = scheme(2 * h, grid.ring_diameter());
    const DenseMatrix A = assemble_operator_matrix(grid, K, q);
    const auto n = static_cast<Eigen::Index>(grid.size());
    ASSERT_EQ(A.rows(), n);
    double scale = A.diagonal().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      EXPECT_GT(A(i, i), 0.0);
      double row = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        row += A(i, j);
        if (j != i) {
          EXPECT_LE(A(i, j), 0.0);
        }
        EXPECT_NEAR(A(i, j), A(j, i), 1e-12 * scale);
      }
      EXPECT_GE(row, -1e-12 * scale);
    }
  }
}

TEST(Operator, MatrixReproducesGridEvaluation) {
  for (int dim : {1, 2}) {
    const auto K = HomogeneousKernel::fractional_laplacian(dim, 0.6);
    const double h = dim == 1 ? 1.0 / 32.0 : 1.0 / 8.0;
    const auto grid = GridSpec::covering(dim, {-1.0, -1.0}, {1.0, 1.0}, h);
    const auto q = scheme(2 * h, grid.ring_diameter());
    const DenseMatrix A = assemble_operator_matrix(grid, K, q);
    const auto u = GridFunction::sample(grid, ClosedForm::from_tag("gaussian", {1.0, 2.0}, dim), Exterior::zero());
    const Eigen::Map<const Eigen::VectorXd> v(u.values().data(), static_cast<Eigen::Index>(u.values().size()));
    const Eigen::VectorXd Av = A * v;
    for (std::size_t i = 0; i < grid.size(); i += 7) {
      const double direct = eval_operator(u, K, grid.node(i), q);
      EXPECT_NEAR(Av(static_cast<Eigen::Index>(i)), direct, 1e-12 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST(Operator, RowSumsAreBracketedByTailMasses) {
  // A 1 is the kernel mass missed by the ramp down to the exterior ring.
  const double s = 0.4, h = 1.0 / 16.0;
  const auto K = HomogeneousKernel::fractional_laplacian(1, s);
  const auto grid = GridSpec::covering(1, {-0.5, 0.0}, {0.5, 0.0}, h);
  const auto q = scheme(2 * h, grid.ring_diameter());
  const DenseMatrix A = assemble_operator_matrix(grid, K, q);
  for (int i = 0; i < grid.shape[0]; ++i) {
    const double x = grid.node(i)[0];
    const double to_last_l = x - grid.origin[0], to_last_r = grid.upper()[0] - x;
    const double upper = 0.5 * (kernel_tail_mass(K, std::max(to_last_l, h / 4), q.angular_nodes) +
                                kernel_tail_mass(K, std::max(to_last_r, h / 4), q.angular_nodes));
    const double lower = 0.5 * (kernel_tail_mass(K, to_last_l + h, q.angular_nodes) +
                                kernel_tail_mass(K, to_last_r + h, q.angular_nodes));
    const double row = A.row(grid.index(i)).sum();
    EXPECT_GE(row, lower * (1 - 1e-9)) << "i=" << i;
    if (std::min(to_last_l, to_last_r) > 0) {
      EXPECT_LE(row, upper * (1 + 1e-9)) << "i=" << i;
    }
  }
}

TEST(Operator, AssemblyCap) {
  const auto K = HomogeneousKernel::fractional_laplacian(1, 0.4);
  const auto grid = GridSpec::covering(1, {0.0, 0.0}, {1.0, 0.0}, 1.0 / 64.0);
  EXPECT_EQ(code_of([&] { assemble_operator_matrix(grid, K, scheme(0.05, 2.0), 10); }), ErrorCode::CapExceeded);
}

TEST(Operator, MissingExteriorIsReported) {
  const auto K = HomogeneousKernel::fractional_laplacian(1, 0.4);
  const auto grid = GridSpec::covering(1, {-1.0, 0.0}, {1.0, 0.0}, 1.0 / 32.0);
  const auto u = GridFunction::sample(grid, ClosedForm::from_tag("gaussian", {1.0, 1.0}, 1), Exterior::none());
  EXPECT_EQ(code_of([&] { eval_operator(u, K, {0.0, 0.0}, scheme(0.1, 4.0)); }),
            ErrorCode::NodeOutsideDomainWithoutExteriorPolicy);
}

TEST(Operator, NonFiniteSamplesAreReported) {
  const auto K = HomogeneousKernel::fractional_laplacian(1, 0.4);
  const ClosedFormField u(ClosedForm::custom(1, [](const Point& p) {
    return std::abs(p[0]) > 2.0 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
  }));
  EXPECT_EQ(code_of([&] { eval_operator(u, K, {0.0, 0.0}, scheme(0.05, 4.0)); }), ErrorCode::NonFiniteQuadrature);
}
