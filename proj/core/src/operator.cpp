#include "freebnd/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace freebnd {
namespace {

constexpr double kTailStop = 1e-14;
constexpr int kMaxTailShells = 400;

struct Direction {
  Point theta;
  double weight;  // a(theta) times the angular quadrature weight
};

// Half of a symmetric angular node set; theta and -theta are paired by the
// integrands, so only one of each is listed.
std::vector<Direction> half_directions(const HomogeneousKernel& K, int angular_nodes) {
  if (K.dim() == 1) return {{{1.0, 0.0}, K.angular(0.0)}};
  const double dt = 2.0 * std::numbers::pi / angular_nodes;
  std::vector<Direction> dirs;
  dirs.reserve(static_cast<std::size_t>(angular_nodes / 2));
  for (int k = 0; k < angular_nodes / 2; ++k) {
    const double t = k * dt;
    dirs.push_back({{std::cos(t), std::sin(t)}, K.angular(t) * dt});
  }
  return dirs;
}

// Linear functional u -> number, built up term by term. The operator
// evaluators only ever talk to a Sampler, so the value path and the matrix
// path share every weight.
class Sampler {
 public:
  explicit Sampler(const Point& x) : x_(x) {}
  virtual ~Sampler() = default;
  /// Adds w * (2u(x) - u(x+off) - u(x-off)).
  virtual void pair(const Point& off, double w) = 0;
  /// Adds w * u(x).
  virtual void center(double w) = 0;
  virtual void constant(double c) = 0;
  /// The value at p, when it is known without reference to unknowns.
  virtual bool known(const Point& p, double& v) const = 0;
  virtual void kinks(const Point& dir, std::vector<double>& out) const {
    (void)dir;
    (void)out;
  }
  virtual double step() const = 0;
  const Point& x() const { return x_; }

 private:
  Point x_;
};

class FieldSampler final : public Sampler {
 public:
  FieldSampler(const Field& f, const Point& x) : Sampler(x), f_(f), u0_(f.value(x)) {}
  void pair(const Point& off, double w) override {
    acc_ += w * (2.0 * u0_ - f_.value(x() + off) - f_.value(x() - off));
  }
  void center(double w) override { acc_ += w * u0_; }
  void constant(double c) override { acc_ += c; }
  bool known(const Point& p, double& v) const override {
    v = f_.value(p);
    return true;
  }
  void kinks(const Point& dir, std::vector<double>& out) const override { f_.ray_breakpoints(x(), dir, out); }
  double step() const override { return f_.derivative_step(); }
  double result() const { return acc_; }

 private:
  const Field& f_;
  double u0_;
  double acc_ = 0.0;
};

bool outside_ring(const GridSpec& g, const Point& p) {
  for (int a = 0; a < g.dim; ++a) {
    const double xi = (p[a] - g.origin[a]) / g.spacing;
    if (xi <= -1.0 || xi >= static_cast<double>(g.shape[a])) return true;
  }
  return false;
}

class GridValueSampler final : public Sampler {
 public:
  GridValueSampler(const GridFunction& u, const Point& x) : Sampler(x), u_(u), u0_(u.value(x)) {}
  void pair(const Point& off, double w) override {
    acc_ += w * (2.0 * u0_ - u_.value(x() + off) - u_.value(x() - off));
  }
  void center(double w) override { acc_ += w * u0_; }
  void constant(double c) override { acc_ += c; }
  bool known(const Point& p, double& v) const override {
    if (!outside_ring(u_.grid(), p)) return false;
    v = u_.exterior().value(p);
    return true;
  }
  double step() const override { return u_.grid().spacing; }
  double result() const { return acc_; }

 private:
  const GridFunction& u_;
  double u0_;
  double acc_ = 0.0;
};

class StencilSampler final : public Sampler {
 public:
  StencilSampler(const GridSpec& g, const Exterior& ext, const Point& x, double* row)
      : Sampler(x), g_(g), ext_(ext), row_(row), c_(interpolation_weights(g, ext, x)) {}
  void pair(const Point& off, double w) override {
    add(c_, 2.0 * w);
    add(interpolation_weights(g_, ext_, x() + off), -w);
    add(interpolation_weights(g_, ext_, x() - off), -w);
  }
  void center(double w) override { add(c_, w); }
  void constant(double c) override { constant_ += c; }
  bool known(const Point& p, double& v) const override {
    if (!outside_ring(g_, p)) return false;
    v = ext_.value(p);
    return true;
  }
  double step() const override { return g_.spacing; }
  double constant_term() const { return constant_; }

 private:
  void add(const InterpWeights& iw, double w) {
    for (int k = 0; k < iw.count; ++k) row_[iw.index[k]] += w * iw.weight[k];
    constant_ += w * iw.constant;
  }
  const GridSpec& g_;
  const Exterior& ext_;
  double* row_;
  InterpWeights c_;
  double constant_ = 0.0;
};

struct Plan {
  std::vector<Direction> dirs;
  std::vector<std::vector<double>> kinks;  // per direction, both orientations
  double eps = 0.0;                        // local inner cutoff
  double step = 0.0;                       // finite-difference step for the Taylor term
  int inner_shells = 0;                    // dyadic shells between eps and the nominal cutoff
  int main_shells = 0;
  bool shared_rule = true;
};

Plan make_plan(const Sampler& S, const HomogeneousKernel& K, const QuadratureScheme& q) {
  q.validate();
  Plan p;
  p.dirs = half_directions(K, q.angular_nodes);
  p.kinks.resize(p.dirs.size());
  p.eps = q.inner_cutoff;
  if (q.split_at_breakpoints) {
    double tmin = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < p.dirs.size(); ++d) {
      const Point th = p.dirs[d].theta;
      S.kinks(th, p.kinks[d]);
      S.kinks(-1.0 * th, p.kinks[d]);
      for (double t : p.kinks[d]) tmin = std::min(tmin, t);
      if (!p.kinks[d].empty()) p.shared_rule = false;
    }
    // The neglected fourth-order Taylor term grows like |u''''| eps^{4-2s}
    // and |u''''| blows up at a kink.
    if (tmin < q.kink_ratio * p.eps) p.eps = std::max(tmin / q.kink_ratio, 1e-8 * q.inner_cutoff);
  }
  p.step = S.step();
  if (p.eps < q.inner_cutoff) {
    p.step = std::min(p.step, 0.5 * p.eps);
    p.inner_shells = static_cast<int>(std::ceil(std::log2(q.inner_cutoff / p.eps)));
  }
  p.main_shells = q.radial_levels > 0
                      ? q.radial_levels
                      : std::max(1, static_cast<int>(std::ceil(std::log2(q.truncation_radius / q.inner_cutoff))));
  return p;
}

// Radial rule on [eps, R] for direction d.
RadialRule near_rule(const Plan& p, std::size_t d, const QuadratureScheme& q, double power) {
  static const std::vector<double> none;
  const auto& kinks = p.kinks[d];
  RadialRule rule;
  if (p.inner_shells > 0) {
    rule = radial_rule(p.eps, q.inner_cutoff, p.inner_shells, q.panels_per_shell, q.gauss_order, power, kinks,
                       q.grading_levels);
  }
  RadialRule outer = radial_rule(q.inner_cutoff, q.truncation_radius, p.main_shells, q.panels_per_shell,
                                 q.gauss_order, power, kinks, q.grading_levels);
  rule.r.insert(rule.r.end(), outer.r.begin(), outer.r.end());
  rule.w.insert(rule.w.end(), outer.w.begin(), outer.w.end());
  return rule;
}

// -scale * eps^{2-2s}/(2-2s) * sum_half a theta^T D^2u theta, with the Hessian
// replaced by second differences. In 2D the angular moment matrix is split
// into nonnegative multiples of e1e1^T, e2e2^T and vv^T (v = e1 +- e2) so that
// all neighbour weights keep the sign of a second difference.
void taylor_term(Sampler& S, const Plan& p, double s, double scale) {
  const double c = scale * std::pow(p.eps, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
  const double d = p.step;
  const double f = c / (d * d);
  if (p.dirs.size() == 1 && p.dirs[0].theta[1] == 0.0) {
    S.pair({d, 0.0}, f * p.dirs[0].weight);
    return;
  }
  double m11 = 0.0, m22 = 0.0, m12 = 0.0;
  for (const auto& dir : p.dirs) {
    m11 += dir.weight * dir.theta[0] * dir.theta[0];
    m22 += dir.weight * dir.theta[1] * dir.theta[1];
    m12 += dir.weight * dir.theta[0] * dir.theta[1];
  }
  if (std::abs(m12) < 1e-14 * (m11 + m22)) m12 = 0.0;
  const double g = std::abs(m12);
  const double alpha = m11 - g;
  const double beta = m22 - g;
  if (alpha >= 0.0 && beta >= 0.0) {
    S.pair({d, 0.0}, f * alpha);
    S.pair({0.0, d}, f * beta);
    if (g > 0.0) S.pair({d, m12 > 0.0 ? d : -d}, f * g);
    return;
  }
  S.pair({d, 0.0}, f * m11);
  S.pair({0.0, d}, f * m22);
  S.pair({d, -d}, -0.25 * f * 2.0 * m12);
  S.pair({d, d}, 0.25 * f * 2.0 * m12);
}

void second_difference_form(Sampler& S, const HomogeneousKernel& K, const QuadratureScheme& q) {
  const Plan p = make_plan(S, K, q);
  const double s = K.s();
  const double power = 1.0 + 2.0 * s;

  RadialRule shared;
  if (p.shared_rule) shared = near_rule(p, 0, q, power);
  for (std::size_t d = 0; d < p.dirs.size(); ++d) {
    const RadialRule rule = p.shared_rule ? RadialRule{} : near_rule(p, d, q, power);
    const RadialRule& rr = p.shared_rule ? shared : rule;
    const Point th = p.dirs[d].theta;
    const double wd = p.dirs[d].weight;
    for (std::size_t i = 0; i < rr.r.size(); ++i) S.pair(rr.r[i] * th, rr.w[i] * wd);
  }

  taylor_term(S, p, s, 1.0);

  double wsum = 0.0;
  for (const auto& dir : p.dirs) wsum += dir.weight;
  // Coefficient of u(x) in int_{|y|>r} u(x) K(y) dy.
  const auto mass = [&](double r) { return wsum * std::pow(r, -2.0 * s) / s; };

  if (q.tail_policy == QuadratureScheme::TailPolicy::bound_and_drop) {
    S.center(mass(q.truncation_radius));
    return;
  }
  double r0 = q.truncation_radius;
  std::vector<RadialRule> rules(p.dirs.size());
  for (int shell = 0; shell < kMaxTailShells; ++shell) {
    const double r1 = 2.0 * r0;
    for (std::size_t d = 0; d < p.dirs.size(); ++d) {
      if (d == 0 || !p.shared_rule) {
        rules[d] = radial_rule(r0, r1, 1, q.panels_per_shell, q.gauss_order, power, p.kinks[d], q.grading_levels);
      } else {
        rules[d] = rules[0];
      }
    }
    bool all_known = true;
    double first = 0.0, num = 0.0, den = 0.0;
    bool uniform = true;
    std::vector<double> vals;
    for (std::size_t d = 0; d < p.dirs.size() && all_known; ++d) {
      const Point th = p.dirs[d].theta;
      for (std::size_t i = 0; i < rules[d].r.size() && all_known; ++i) {
        double vp = 0.0, vm = 0.0;
        all_known = S.known(S.x() + rules[d].r[i] * th, vp) && S.known(S.x() - rules[d].r[i] * th, vm);
        if (!all_known) break;
        const double mean = 0.5 * (vp + vm);
        if (vals.empty()) first = mean;
        uniform = uniform && mean == first;
        const double w = rules[d].w[i] * p.dirs[d].weight;
        vals.push_back(mean);
        num += w * mean;
        den += w;
      }
    }
    if (all_known) {
      const double ubar = uniform ? first : num / den;
      double dev = 0.0;
      std::size_t k = 0;
      // Only u(x+y) + u(x-y) enters the integrand, so the pair means are compared.
      for (std::size_t d = 0; d < p.dirs.size(); ++d) {
        for (std::size_t i = 0; i < rules[d].r.size(); ++i, ++k) {
          dev += 2.0 * rules[d].w[i] * p.dirs[d].weight * std::abs(vals[k] - ubar);
        }
      }
      if (dev < kTailStop) {
        // Beyond r0 the exterior is treated as its shell mean.
        const double m = mass(r0);
        S.center(m);
        S.constant(-ubar * m);
        return;
      }
    }
    for (std::size_t d = 0; d < p.dirs.size(); ++d) {
      const Point th = p.dirs[d].theta;
      for (std::size_t i = 0; i < rules[d].r.size(); ++i) S.pair(rules[d].r[i] * th, rules[d].w[i] * p.dirs[d].weight);
    }
    r0 = r1;
  }
  throw Error(ErrorCode::NonFiniteQuadrature, "operator tail did not fall below 1e-14 within " +
                                                  std::to_string(kMaxTailShells) + " dyadic shells");
}

void gradient_form(Sampler& S, const HomogeneousKernel& K, const QuadratureScheme& q) {
  const Plan p = make_plan(S, K, q);
  const double s = K.s();
  const double power = 2.0 * s;
  const double d = p.step;
  const double pre = -1.0 / (2.0 * s) / (2.0 * d);

  // d/dr of the symmetric second difference, by central differences along
  // the ray: (pair(r - d) - pair(r + d)) / 2d.
  const auto add_node = [&](const Point& th, double r, double w) {
    S.pair((r - d) * th, pre * w);
    S.pair((r + d) * th, -pre * w);
  };

  RadialRule shared;
  if (p.shared_rule) shared = near_rule(p, 0, q, power);
  for (std::size_t k = 0; k < p.dirs.size(); ++k) {
    const RadialRule rule = p.shared_rule ? RadialRule{} : near_rule(p, k, q, power);
    const RadialRule& rr = p.shared_rule ? shared : rule;
    for (std::size_t i = 0; i < rr.r.size(); ++i) add_node(p.dirs[k].theta, rr.r[i], rr.w[i] * p.dirs[k].weight);
  }

  taylor_term(S, p, s, 1.0 / s);

  if (q.tail_policy == QuadratureScheme::TailPolicy::bound_and_drop) return;
  double r0 = q.truncation_radius;
  for (int shell = 0; shell < kMaxTailShells; ++shell) {
    const double r1 = 2.0 * r0;
    std::vector<RadialRule> rules(p.dirs.size());
    bool all_known = true;
    double mag = 0.0;
    for (std::size_t k = 0; k < p.dirs.size(); ++k) {
      rules[k] = radial_rule(r0, r1, 1, q.panels_per_shell, q.gauss_order, power, p.kinks[k], q.grading_levels);
      const Point th = p.dirs[k].theta;
      for (std::size_t i = 0; i < rules[k].r.size() && all_known; ++i) {
        const double r = rules[k].r[i];
        double a = 0.0, b = 0.0, c = 0.0, e = 0.0;
        all_known = S.known(S.x() + (r + d) * th, a) && S.known(S.x() - (r + d) * th, b) &&
                    S.known(S.x() + (r - d) * th, c) && S.known(S.x() - (r - d) * th, e);
        mag += std::abs(rules[k].w[i] * p.dirs[k].weight * ((a + b) - (c + e)) / (2.0 * d));
      }
    }
    if (all_known && mag < kTailStop) return;
    for (std::size_t k = 0; k < p.dirs.size(); ++k) {
      for (std::size_t i = 0; i < rules[k].r.size(); ++i) {
        add_node(p.dirs[k].theta, rules[k].r[i], rules[k].w[i] * p.dirs[k].weight);
      }
    }
    r0 = r1;
  }
  throw Error(ErrorCode::NonFiniteQuadrature, "gradient-form tail did not fall below 1e-14");
}

void require_in_hull(const GridSpec& g, const Point& x) {
  const Point hi = g.upper();
  const double tol = 1e-9 * g.spacing;
  for (int a = 0; a < g.dim; ++a) {
    if (x[a] < g.origin[a] - tol || x[a] > hi[a] + tol) {
      throw Error(ErrorCode::InvalidArgument, "operator evaluation point lies outside the grid");
    }
  }
}

double finite_or_throw(double v) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::NonFiniteQuadrature,
                "operator value is not finite; the inner cutoff is too large for the local curvature");
  }
  return v;
}

}  // namespace

double eval_operator(const Field& u, const HomogeneousKernel& K, const Point& x, const QuadratureScheme& q) {
  if (u.dim() != K.dim()) throw Error(ErrorCode::InvalidArgument, "field and kernel dimensions differ");
  FieldSampler S(u, x);
  second_difference_form(S, K, q);
  return finite_or_throw(S.result());
}

double eval_operator(const GridFunction& u, const HomogeneousKernel& K, const Point& x, const QuadratureScheme& q) {
  if (u.dim() != K.dim()) throw Error(ErrorCode::InvalidArgument, "grid and kernel dimensions differ");
  require_in_hull(u.grid(), x);
  GridValueSampler S(u, x);
  second_difference_form(S, K, q);
  return finite_or_throw(S.result());
}

double eval_operator_gradient_form(const Field& u, const HomogeneousKernel& K, const Point& x,
                                   const QuadratureScheme& q) {
  if (u.dim() != K.dim()) throw Error(ErrorCode::InvalidArgument, "field and kernel dimensions differ");
  FieldSampler S(u, x);
  gradient_form(S, K, q);
  return finite_or_throw(S.result());
}

OperatorStencil operator_stencil(const GridSpec& grid, const Exterior& exterior, const HomogeneousKernel& K,
                                 const Point& x, const QuadratureScheme& q) {
  if (grid.dim != K.dim()) throw Error(ErrorCode::InvalidArgument, "grid and kernel dimensions differ");
  require_in_hull(grid, x);
  std::vector<double> row(grid.size(), 0.0);
  StencilSampler S(grid, exterior, x, row.data());
  second_difference_form(S, K, q);
  OperatorStencil out;
  out.constant = finite_or_throw(S.constant_term());
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] != 0.0) {
      out.index.push_back(i);
      out.weight.push_back(finite_or_throw(row[i]));
    }
  }
  return out;
}

DenseMatrix assemble_operator_matrix(const GridSpec& grid, const HomogeneousKernel& K, const QuadratureScheme& q,
                                     std::size_t cap) {
  if (grid.dim != K.dim()) throw Error(ErrorCode::InvalidArgument, "grid and kernel dimensions differ");
  const std::size_t n = grid.size();
  if (n > cap) {
    throw Error(ErrorCode::CapExceeded, "operator matrix needs " + std::to_string(n) + " rows, cap is " +
                                            std::to_string(cap));
  }
  DenseMatrix A = DenseMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const Exterior zero = Exterior::zero();
  for (std::size_t i = 0; i < n; ++i) {
    StencilSampler S(grid, zero, grid.node(i), A.row(static_cast<Eigen::Index>(i)).data());
    second_difference_form(S, K, q);
  }
  if (!A.allFinite()) throw Error(ErrorCode::NonFiniteQuadrature, "assembled operator matrix is not finite");
  return A;
}

double kernel_tail_mass(const HomogeneousKernel& K, double rho, int angular_nodes) {
  double wsum = 0.0;
  for (const auto& dir : half_directions(K, angular_nodes)) wsum += dir.weight;
  return wsum * std::pow(rho, -2.0 * K.s()) / K.s();
}

}  // namespace freebnd
