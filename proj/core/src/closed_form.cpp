#include "freebnd/closed_form.hpp"

#include <algorithm>
#include <cmath>

namespace freebnd {
namespace {

void require_params(const std::string& tag, const std::vector<double>& p, std::size_t n) {
  if (p.size() != n) {
    throw Error(ErrorCode::InvalidArgument,
                "closed form '" + tag + "' expects " + std::to_string(n) + " parameters, got " +
                    std::to_string(p.size()));
  }
}

double positive_power(double base, double p) {
  if (base <= 0.0) return 0.0;
  return p == 1.0 ? base : std::pow(base, p);
}

// Roots t > 0 of |x + t dir - c|^2 = R^2.
void sphere_crossings(const Point& x, const Point& dir, const Point& c, double radius,
                      std::vector<double>& out) {
  const Point q = x - c;
  const double a = dot(dir, dir);
  const double b = 2.0 * dot(q, dir);
  const double cc = dot(q, q) - radius * radius;
  const double disc = b * b - 4.0 * a * cc;
  if (a <= 0.0 || disc <= 0.0) return;
  const double sq = std::sqrt(disc);
  const double t1 = (-b - sq) / (2.0 * a);
  const double t2 = (-b + sq) / (2.0 * a);
  if (t1 > 0.0) out.push_back(t1);
  if (t2 > 0.0) out.push_back(t2);
}

}  // namespace

ClosedForm::ClosedForm() : ClosedForm(from_tag("zero", {}, 1)) {}

ClosedForm::ClosedForm(std::string tag, std::vector<double> params, int dim, ValueFn value,
                       BreakFn breaks)
    : tag_(std::move(tag)), params_(std::move(params)), dim_(dim), value_(std::move(value)),
      breaks_(std::move(breaks)) {
  if (dim_ != 1 && dim_ != 2) {
    throw Error(ErrorCode::InvalidArgument, "closed form dimension must be 1 or 2");
  }
  if (!value_) {
    throw Error(ErrorCode::InvalidArgument, "closed form needs a value function");
  }
}

ClosedForm ClosedForm::custom(int dim, ValueFn value, BreakFn breaks) {
  return ClosedForm("custom", {}, dim, std::move(value), std::move(breaks));
}

ClosedForm ClosedForm::from_tag(const std::string& tag, std::vector<double> p, int dim) {
  if (dim != 1 && dim != 2) {
    throw Error(ErrorCode::InvalidArgument, "closed form dimension must be 1 or 2");
  }
  const std::size_t n = static_cast<std::size_t>(dim);
  if (tag == "zero") {
    require_params(tag, p, 0);
    return ClosedForm(tag, p, dim, [](const Point&) { return 0.0; });
  }
  if (tag == "constant") {
    require_params(tag, p, 1);
    const double c = p[0];
    return ClosedForm(tag, p, dim, [c](const Point&) { return c; });
  }
  if (tag == "linear") {
    require_params(tag, p, 1 + n);
    const double c0 = p[0];
    const Point g{p[1], dim == 2 ? p[2] : 0.0};
    return ClosedForm(tag, p, dim, [c0, g](const Point& x) { return c0 + dot(g, x); });
  }
  if (tag == "gaussian") {
    require_params(tag, p, 2);
    const double amp = p[0], a = p[1];
    return ClosedForm(tag, p, dim, [amp, a](const Point& x) { return amp * std::exp(-a * dot(x, x)); });
  }
  if (tag == "paraboloid") {
    require_params(tag, p, 2);
    const double c0 = p[0], a = p[1];
    return ClosedForm(tag, p, dim, [c0, a](const Point& x) { return c0 - a * dot(x, x); });
  }
  if (tag == "radial_power") {
    require_params(tag, p, 1 + n);
    const double pw = p[0];
    const Point c{p[1], dim == 2 ? p[2] : 0.0};
    return ClosedForm(tag, p, dim, [pw, c](const Point& x) { return std::pow(norm(x - c), pw); });
  }
  if (tag == "halfspace_power") {
    require_params(tag, p, 2 + n);
    const double pw = p[0];
    Point e{p[1], dim == 2 ? p[2] : 0.0};
    const double len = norm(e);
    if (!(len > 0.0)) throw Error(ErrorCode::InvalidArgument, "halfspace_power: zero normal");
    e = (1.0 / len) * e;
    const double offset = p[1 + n];
    return ClosedForm(
        tag, p, dim, [pw, e, offset](const Point& x) { return positive_power(dot(x, e) - offset, pw); },
        [e, offset](const Point& x, const Point& dir, std::vector<double>& out) {
          const double slope = dot(dir, e);
          if (slope == 0.0) return;
          const double t = (offset - dot(x, e)) / slope;
          if (t > 0.0) out.push_back(t);
        });
  }
  if (tag == "ball_torsion_power") {
    require_params(tag, p, 2 + n);
    const double pw = p[0], radius = p[1];
    if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "ball_torsion_power: radius must be > 0");
    const Point c{p[2], dim == 2 ? p[3] : 0.0};
    const double scale = 1.0 / (2.0 * dim);
    return ClosedForm(
        tag, p, dim,
        [pw, radius, c, scale](const Point& x) {
          const Point q = x - c;
          return positive_power(scale * (radius * radius - dot(q, q)), pw);
        },
        [radius, c](const Point& x, const Point& dir, std::vector<double>& out) {
          sphere_crossings(x, dir, c, radius, out);
        });
  }
  throw Error(ErrorCode::InvalidArgument, "unknown closed form tag '" + tag + "'");
}

ClosedForm ClosedForm::from_json(const nlohmann::json& j, int dim) {
  if (!j.is_object() || !j.contains("tag")) {
    throw Error(ErrorCode::ConfigInvalid, "closed form block needs a 'tag'");
  }
  std::vector<double> params;
  if (j.contains("params")) params = j.at("params").get<std::vector<double>>();
  return from_tag(j.at("tag").get<std::string>(), std::move(params), dim);
}

nlohmann::json ClosedForm::to_json() const {
  if (!serializable()) {
    throw Error(ErrorCode::InvalidArgument, "closed form '" + tag_ + "' cannot be serialized");
  }
  return nlohmann::json{{"tag", tag_}, {"params", params_}};
}

ClosedForm operator*(const ClosedForm& a, const ClosedForm& b) {
  if (a.dim_ != b.dim_) throw Error(ErrorCode::InvalidArgument, "closed form product: dim mismatch");
  auto fa = a.value_;
  auto fb = b.value_;
  auto ba = a.breaks_;
  auto bb = b.breaks_;
  return ClosedForm("product", {}, a.dim_, [fa, fb](const Point& x) { return fa(x) * fb(x); },
                    [ba, bb](const Point& x, const Point& dir, std::vector<double>& out) {
                      if (ba) ba(x, dir, out);
                      if (bb) bb(x, dir, out);
                    });
}

}  // namespace freebnd
