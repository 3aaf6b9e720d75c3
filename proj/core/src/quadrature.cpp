#include "freebnd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <boost/math/special_functions/legendre.hpp>

#include "freebnd/common.hpp"

namespace freebnd {

void QuadratureScheme::validate() const {
  if (!(inner_cutoff > 0.0) || !(truncation_radius > inner_cutoff)) {
    throw Error(ErrorCode::InvalidArgument, "quadrature needs 0 < inner_cutoff < truncation_radius");
  }
  if (angular_nodes < 2 || angular_nodes % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "quadrature angular_nodes must be even and >= 2");
  }
  if (radial_levels < 0 || gauss_order < 1 || gauss_order > 64 || panels_per_shell < 1 || grading_levels < 0 ||
      !(kink_ratio >= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "quadrature radial parameters out of range");
  }
}

QuadratureScheme QuadratureScheme::from_json(const nlohmann::json& j) {
  QuadratureScheme q;
  try {
    q.radial_levels = j.value("radial_levels", q.radial_levels);
    q.angular_nodes = j.value("angular_nodes", q.angular_nodes);
    q.inner_cutoff = j.value("inner_cutoff", q.inner_cutoff);
    q.truncation_radius = j.value("truncation_radius", q.truncation_radius);
    q.gauss_order = j.value("gauss_order", q.gauss_order);
    q.panels_per_shell = j.value("panels_per_shell", q.panels_per_shell);
    q.split_at_breakpoints = j.value("split_at_breakpoints", q.split_at_breakpoints);
    q.grading_levels = j.value("grading_levels", q.grading_levels);
    q.kink_ratio = j.value("kink_ratio", q.kink_ratio);
    const std::string tail = j.value("tail_policy", std::string("analytic"));
    if (tail == "analytic") {
      q.tail_policy = TailPolicy::analytic;
    } else if (tail == "bound-and-drop") {
      q.tail_policy = TailPolicy::bound_and_drop;
    } else {
      throw Error(ErrorCode::ConfigInvalid, "unknown tail_policy '" + tail + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("quadrature block: ") + e.what());
  }
  try {
    q.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
  return q;
}

nlohmann::json QuadratureScheme::to_json() const {
  return {{"radial_levels", radial_levels},
          {"angular_nodes", angular_nodes},
          {"inner_cutoff", inner_cutoff},
          {"truncation_radius", truncation_radius},
          {"tail_policy", tail_policy == TailPolicy::analytic ? "analytic" : "bound-and-drop"},
          {"gauss_order", gauss_order},
          {"panels_per_shell", panels_per_shell},
          {"split_at_breakpoints", split_at_breakpoints},
          {"grading_levels", grading_levels},
          {"kink_ratio", kink_ratio}};
}

const GaussRule& gauss_legendre(int order) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  GaussRule rule;
  const auto zeros = boost::math::legendre_p_zeros<double>(order);
  for (double z : zeros) {
    const double dp = boost::math::legendre_p_prime<double>(order, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.x.push_back(z);
    rule.w.push_back(w);
    if (z != 0.0) {
      rule.x.push_back(-z);
      rule.w.push_back(w);
    }
  }
  std::vector<std::size_t> perm(rule.x.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return rule.x[a] < rule.x[b]; });
  GaussRule sorted;
  for (std::size_t i : perm) {
    sorted.x.push_back(rule.x[i]);
    sorted.w.push_back(rule.w[i]);
  }
  return cache.emplace(order, std::move(sorted)).first->second;
}

RadialRule radial_rule(double a, double b, int shells, int panels, int order, double power,
                       const std::vector<double>& kinks, int grading) {
  RadialRule out;
  if (!(b > a)) return out;
  std::vector<double> edges;
  const double ratio = std::pow(b / a, 1.0 / shells);
  double lo = a;
  for (int k = 0; k < shells; ++k) {
    const double hi = k + 1 == shells ? b : lo * ratio;
    for (int p = 0; p < panels; ++p) edges.push_back(lo + (hi - lo) * p / panels);
    lo = hi;
  }
  edges.push_back(b);

  std::vector<double> inside;
  for (double t : kinks) {
    if (t > a && t < b) inside.push_back(t);
  }
  if (!inside.empty()) {
    std::sort(inside.begin(), inside.end());
    std::vector<double> merged = edges;
    merged.insert(merged.end(), inside.begin(), inside.end());
    std::sort(merged.begin(), merged.end());
    std::vector<double> graded = merged;
    for (double t : inside) {
      const auto it = std::lower_bound(merged.begin(), merged.end(), t);
      const double left = it == merged.begin() ? a : *(it - 1);
      double right = b;
      for (auto jt = it; jt != merged.end(); ++jt) {
        if (*jt > t) {
          right = *jt;
          break;
        }
      }
      double gl = t - left, gr = right - t;
      for (int g = 0; g < grading; ++g) {
        gl *= 0.25;
        gr *= 0.25;
        graded.push_back(t - gl);
        graded.push_back(t + gr);
      }
    }
    std::sort(graded.begin(), graded.end());
    graded.erase(std::unique(graded.begin(), graded.end()), graded.end());
    edges = std::move(graded);
  }

  const GaussRule& g = gauss_legendre(order);
  out.r.reserve((edges.size() - 1) * g.x.size());
  out.w.reserve(out.r.capacity());
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double mid = 0.5 * (edges[e] + edges[e + 1]);
    const double half = 0.5 * (edges[e + 1] - edges[e]);
    if (!(half > 0.0)) continue;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      const double r = mid + half * g.x[i];
      out.r.push_back(r);
      out.w.push_back(half * g.w[i] * std::pow(r, -power));
    }
  }
  return out;
}

}  // namespace freebnd
