#include <cmath>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <gtest/gtest.h>

#include "lcp_oracle.hpp"
#include "operator_oracle.hpp"

namespace {

// (-Delta)^s exp(-x^2) in 1D through Kummer's function.
double gaussian_closed_form(double s, double x) {
  return std::pow(4.0, s) * boost::math::tgamma(0.5 + s) / boost::math::tgamma(0.5) *
         boost::math::hypergeometric_1F1(0.5 + s, 0.5, -x * x);
}

void expect_complementary(const Eigen::MatrixXd& M, const Eigen::VectorXd& q, const Eigen::VectorXd& z) {
  const Eigen::VectorXd w = M * z + q;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    EXPECT_GE(z(i), -1e-14);
    EXPECT_GE(w(i), -1e-12);
    EXPECT_LE(std::abs(z(i) * w(i)), 1e-12);
  }
}

}  // namespace

TEST(LemkeOracle, TwoByTwoByHand) {
  Eigen::MatrixXd M(2, 2);
  M << 2.0, 1.0, 1.0, 2.0;
  Eigen::VectorXd q(2);
  q << -5.0, -6.0;
  // Both components active: M z = -q gives z = (4/3, 7/3).
  const auto r = oracle::lemke(M, q);
  ASSERT_TRUE(r.solved);
  EXPECT_NEAR(r.z(0), 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(r.z(1), 7.0 / 3.0, 1e-14);

  q << -1.0, 3.0;
  // Only the first is active: z = (1/2, 0), w2 = 3.5.
  const auto r2 = oracle::lemke(M, q);
  ASSERT_TRUE(r2.solved);
  EXPECT_NEAR(r2.z(0), 0.5, 1e-14);
  EXPECT_EQ(r2.z(1), 0.0);
}

TEST(LemkeOracle, NonnegativeDataGivesZero) {
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(4, 4) * 3.0;
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(4, 0.5);
  const auto r = oracle::lemke(M, q);
  ASSERT_TRUE(r.solved);
  EXPECT_EQ(r.pivots, 0);
  EXPECT_EQ(r.z.norm(), 0.0);
}

TEST(LemkeOracle, TridiagonalObstacle) {
  // Discrete -u'' >= 0 above an obstacle, written as an LCP in z = u - phi.
  const int n = 60;
  const double h = 1.0 / (n + 1);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd phi(n);
  for (int i = 0; i < n; ++i) {
    M(i, i) = 2.0 / (h * h);
    if (i > 0) M(i, i - 1) = -1.0 / (h * h);
    if (i + 1 < n) M(i, i + 1) = -1.0 / (h * h);
    const double x = (i + 1) * h;
    phi(i) = 0.3 - 4.0 * (x - 0.5) * (x - 0.5);
  }
  const Eigen::VectorXd q = M * phi;
  const auto r = oracle::lemke(M, q);
  ASSERT_TRUE(r.solved);
  expect_complementary(M, q, r.z);
  // u = phi + z is concave and touches phi somewhere.
  const Eigen::VectorXd u = phi + r.z;
  EXPECT_NEAR(r.z.minCoeff(), 0.0, 1e-15);
  for (int i = 1; i + 1 < n; ++i) EXPECT_LE(u(i + 1) - 2.0 * u(i) + u(i - 1), 1e-12);
}

TEST(OperatorOracle, GaussianKummerForm) {
  for (double s : {0.3, 0.5, 0.7}) {
    for (double x : {0.0, 0.35, 0.7, 1.5, 3.0}) {
      const double ref = gaussian_closed_form(s, x);
      const double got = oracle::fractional_laplacian_1d(oracle::gaussian_second_difference, s, x);
      EXPECT_NEAR(got, ref, 1e-9 * std::max(1.0, std::abs(ref))) << "s=" << s << " x=" << x;
    }
  }
}

TEST(OperatorOracle, SecondDifferenceIsCancellationFree) {
  const double x = 0.4, r = 1e-6;
  // 2e^{-x^2} - e^{-(x+r)^2} - e^{-(x-r)^2} = -u''(x) r^2 + O(r^4), u'' = (4x^2 - 2) e^{-x^2}.
  const double expect = -(4.0 * x * x - 2.0) * std::exp(-x * x) * r * r;
  EXPECT_NEAR(oracle::gaussian_second_difference(x, r), expect, 1e-8 * std::abs(expect));
  EXPECT_NEAR(oracle::gaussian_second_difference(0.0, 30.0), 2.0, 1e-15);
}
