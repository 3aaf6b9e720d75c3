#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "freebnd/regularity.hpp"

namespace freebnd {
namespace {

// t -> L(eta d^s)(z + t dir), memoized on a half-lattice of spacing `unit`.
class LineSamples final : public Field {
 public:
  LineSamples(std::function<double(double)> eval, double unit) : eval_(std::move(eval)), unit_(unit) {}
  int dim() const override { return 1; }
  double value(const Point& p) const override {
    const long key = std::lround(p[0] / (0.5 * unit_));
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const double v = eval_(static_cast<double>(key) * 0.5 * unit_);
    cache_.emplace(key, v);
    return v;
  }
  double derivative_step() const override { return unit_; }

 private:
  std::function<double(double)> eval_;
  double unit_;
  mutable std::map<long, double> cache_;
};

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

nlohmann::json LdsDecayResult::to_json() const {
  nlohmann::json j{{"j", this->j},
                   {"z", {z[0], z[1]}},
                   {"direction", {direction[0], direction[1]}},
                   {"distances", distances},
                   {"values", values},
                   {"sup_abs", sup_abs},
                   {"exponent", number_or_null(exponent)},
                   {"r2", r2},
                   {"predicted", number_or_null(predicted)},
                   {"noise_floor", noise_floor},
                   {"verdict", to_string(verdict)},
                   {"note", note}};
  if (holder) j["holder"] = holder->to_json();
  return j;
}

LdsDecayResult verify_lds_decay(const Domain& domain, const HomogeneousKernel& K, const ClosedForm& eta, int j,
                                const Point& z, const std::vector<double>& distances, const LdsOptions& opt) {
  if (j != 0 && j != 1) throw Error(ErrorCode::InvalidArgument, "verify_lds_decay supports j in {0, 1}");
  if (distances.size() < 3) throw Error(ErrorCode::InvalidArgument, "verify_lds_decay needs at least 3 distances");
  const auto dform = domain.closed_form_distance();
  if (!dform) throw Error(ErrorCode::InvalidArgument, "verify_lds_decay needs a domain with a closed-form distance");
  auto params = dform->params();
  params[0] = K.s();
  const ClosedForm ds = ClosedForm::from_tag(dform->tag(), params, dform->dim());
  const ClosedFormField f(eta * ds);

  LdsDecayResult out;
  out.j = j;
  out.z = z;
  Point dir = opt.direction ? *opt.direction : domain.inward_normal(z);
  dir = (1.0 / norm(dir)) * dir;
  out.direction = dir;
  out.distances = distances;
  const double s = K.s();
  const double beta = domain.beta();
  out.predicted = std::isfinite(beta) ? beta - 1.0 - s - j : std::numeric_limits<double>::infinity();

  const auto L = [&](double t) {
    const Point x = z + t * dir;
    if (!domain.contains(x)) throw Error(ErrorCode::InvalidArgument, "LdsDecay sample point is outside the domain");
    return eval_operator(f, K, x, opt.quadrature);
  };

  QuadratureScheme fine = opt.quadrature;
  fine.gauss_order *= 2;
  fine.panels_per_shell *= 2;
  double drift = 0.0;
  for (double t : distances) {
    const Point x = z + t * dir;
    if (domain.contains(x)) drift = std::max(drift, std::abs(L(t) - eval_operator(f, K, x, fine)));
  }
  const double floor = std::max(opt.noise_floor, 8.0 * drift);
  out.noise_floor = floor;

  std::vector<double> lt, lv;
  if (j == 0) {
    for (double t : distances) {
      const double v = L(t);
      out.values.push_back(v);
      out.sup_abs = std::max(out.sup_abs, std::abs(v));
      if (std::abs(v) > floor) {
        lt.push_back(std::log(t));
        lv.push_back(std::log(std::abs(v)));
      }
    }
    if (lt.size() >= 2) {
      const LineFit fit = fit_line(lt, lv);
      out.exponent = fit.slope;
      out.r2 = fit.r2;
    } else {
      out.exponent = std::numeric_limits<double>::quiet_NaN();
      out.r2 = 0.0;
    }
    // k = 1 probe along the approach line, base points on a 64-cell lattice.
    const double tmax = *std::max_element(distances.begin(), distances.end());
    const double unit = tmax / 64.0;
    LineSamples line(L, unit);
    HolderRegion region;
    region.lo = {unit, 0.0};
    region.hi = {tmax, 0.0};
    region.spacing = unit;
    out.holder = estimate_holder(line, region, 1, dyadic_steps(2.0 * unit, 4), floor);
    if (!std::isfinite(out.sup_abs)) {
      out.verdict = Verdict::violated;
      out.note = "L(eta d^s) is not finite near the boundary";
    } else if (out.holder->saturated || out.holder->exponent >= opt.holder_threshold) {
      out.verdict = Verdict::consistent;
      out.note = out.holder->saturated ? "bounded; Holder probe saturated" : "bounded; Holder exponent above threshold";
    } else if (out.holder->r2 < 0.98) {
      out.verdict = Verdict::inconclusive;
      out.note = "Holder fit quality below 0.98";
    } else {
      out.verdict = Verdict::violated;
      out.note = "Holder exponent below threshold";
    }
    return out;
  }

  std::size_t noisy = 0;
  for (double t : distances) {
    const double dt = 0.25 * t;
    const double v = std::abs(L(t + dt) - L(t - dt)) / (2.0 * dt);
    out.values.push_back(v);
    out.sup_abs = std::max(out.sup_abs, v);
    if (v > floor / dt) {
      lt.push_back(std::log(t));
      lv.push_back(std::log(v));
    } else {
      ++noisy;
    }
  }
  if (lt.size() < 3) {
    out.exponent = std::numeric_limits<double>::quiet_NaN();
    out.verdict = Verdict::inconclusive;
    out.note = std::string(to_string(ErrorCode::QuadratureNoiseFloor)) + ": " + std::to_string(noisy) + " of " +
               std::to_string(distances.size()) + " derivative samples are below the quadrature noise floor";
    return out;
  }
  const LineFit fit = fit_line(lt, lv);
  out.exponent = fit.slope;
  out.r2 = fit.r2;
  // For beta = infinity the derivative stays bounded: exponent >= 0.
  const double need = std::isfinite(beta) ? out.predicted : 0.0;
  if (fit.slope >= need - opt.tolerance) {
    out.verdict = Verdict::consistent;
    out.note = "derivative decay exponent meets the predicted bound";
  } else if (fit.r2 < 0.98) {
    out.verdict = Verdict::inconclusive;
    out.note = "fit quality below 0.98";
  } else {
    out.verdict = Verdict::violated;
    out.note = "derivative blows up faster than predicted";
  }
  return out;
}

}  // namespace freebnd
