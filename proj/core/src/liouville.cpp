#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "freebnd/extension.hpp"

namespace freebnd {

HalflineFit fit_halfline_profile(const std::vector<double>& x, const std::vector<double>& u, double s, int k) {
  if (x.size() != u.size()) throw Error(ErrorCode::InvalidArgument, "halfline samples: size mismatch");
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "polynomial degree must be non-negative");
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index m = k + 1;
  if (n < m + 1) throw Error(ErrorCode::SingularFit, "fewer samples than polynomial coefficients");
  double X = 0.0;
  for (double xi : x) {
    if (!(xi > 0.0)) throw Error(ErrorCode::SingularFit, "halfline samples must have x > 0");
    X = std::max(X, xi);
  }
  Eigen::MatrixXd V(n, m);
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    q(i) = u[static_cast<std::size_t>(i)] / std::pow(xi, s);
    for (Eigen::Index j = 0; j < m; ++j) V(i, j) = std::pow(xi / X, static_cast<double>(j));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
  qr.setThreshold(1e-12);
  if (qr.rank() < m) throw Error(ErrorCode::SingularFit, "Vandermonde system is rank deficient");
  const Eigen::VectorXd c = qr.solve(q);

  HalflineFit out;
  out.coefficients.resize(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) out.coefficients[static_cast<std::size_t>(j)] = c(j) / std::pow(X, static_cast<double>(j));
  const double scale = q.cwiseAbs().maxCoeff();
  const double res = (q - V * c).cwiseAbs().maxCoeff();
  out.residual = scale > 0.0 ? res / scale : res;
  out.liouville_form = out.residual <= 1e-6;
  return out;
}

HalflineFit fit_halfline_profile(const GridFunction& u, double X, double s, int k) {
  if (u.grid().dim != 1) throw Error(ErrorCode::InvalidArgument, "halfline profile needs a one-dimensional grid");
  std::vector<double> xs, us;
  for (std::size_t i = 0; i < u.grid().size(); ++i) {
    const double x = u.grid().node(i)[0];
    if (x > 0.0 && x <= X * (1.0 + 1e-12)) {
      xs.push_back(x);
      us.push_back(u[i]);
    }
  }
  return fit_halfline_profile(xs, us, s, k);
}

}  // namespace freebnd
