#include "freebnd/grid_function.hpp"

#include <algorithm>
#include <cmath>

namespace freebnd {
namespace {

// Fractional grid coordinate, snapped onto integers within rounding noise so
// that nodes interpolate to exactly their own value.
double grid_coordinate(double x, double origin, double h) {
  const double xi = (x - origin) / h;
  const double r = std::nearbyint(xi);
  return std::abs(xi - r) < 1e-11 ? r : xi;
}

}  // namespace

GridSpec GridSpec::covering(int dim, const Point& lo, const Point& hi, double h) {
  GridSpec g;
  g.dim = dim;
  g.origin = {lo[0], dim == 2 ? lo[1] : 0.0};
  g.spacing = h;
  g.shape[0] = static_cast<int>(std::lround((hi[0] - lo[0]) / h)) + 1;
  g.shape[1] = dim == 2 ? static_cast<int>(std::lround((hi[1] - lo[1]) / h)) + 1 : 1;
  g.validate();
  return g;
}

GridSpec GridSpec::from_json(const nlohmann::json& j) {
  GridSpec g;
  try {
    g.dim = j.at("dim").get<int>();
    const auto origin = j.at("origin").get<std::vector<double>>();
    const auto shape = j.at("shape").get<std::vector<int>>();
    g.spacing = j.at("spacing").get<double>();
    if (origin.size() != static_cast<std::size_t>(g.dim) || shape.size() != static_cast<std::size_t>(g.dim)) {
      throw Error(ErrorCode::ConfigInvalid, "grid origin/shape length must equal dim");
    }
    g.origin = {origin[0], g.dim == 2 ? origin[1] : 0.0};
    g.shape = {shape[0], g.dim == 2 ? shape[1] : 1};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("grid block: ") + e.what());
  }
  g.validate();
  return g;
}

double GridSpec::ring_diameter() const {
  const double wx = (shape[0] + 1) * spacing;
  const double wy = dim == 2 ? (shape[1] + 1) * spacing : 0.0;
  return std::hypot(wx, wy);
}

std::array<int, 2> GridSpec::nearest(const Point& x) const {
  std::array<int, 2> ij{0, 0};
  for (int a = 0; a < dim; ++a) {
    const long k = std::lround((x[a] - origin[a]) / spacing);
    ij[a] = static_cast<int>(std::clamp<long>(k, 0, shape[a] - 1));
  }
  return ij;
}

bool GridSpec::contains_strictly(const Point& x) const {
  const Point hi = upper();
  for (int a = 0; a < dim; ++a) {
    if (!(x[a] > origin[a] && x[a] < hi[a])) return false;
  }
  return true;
}

void GridSpec::validate() const {
  if (dim != 1 && dim != 2) throw Error(ErrorCode::InvalidArgument, "grid dim must be 1 or 2");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive and finite");
  }
  if (shape[0] < 1 || shape[1] < 1 || (dim == 1 && shape[1] != 1)) {
    throw Error(ErrorCode::InvalidArgument, "grid shape must be positive (shape[1] == 1 in 1D)");
  }
  if (!std::isfinite(origin[0]) || !std::isfinite(origin[1])) {
    throw Error(ErrorCode::InvalidArgument, "grid origin must be finite");
  }
}

nlohmann::json GridSpec::to_json() const {
  nlohmann::json j;
  j["dim"] = dim;
  j["spacing"] = spacing;
  if (dim == 1) {
    j["origin"] = std::vector<double>{origin[0]};
    j["shape"] = std::vector<int>{shape[0]};
  } else {
    j["origin"] = std::vector<double>{origin[0], origin[1]};
    j["shape"] = std::vector<int>{shape[0], shape[1]};
  }
  return j;
}

Exterior Exterior::from_json(const nlohmann::json& j, int dim) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "zero") return zero();
  if (kind == "none") return none();
  if (kind == "closed_form") return closed_form(ClosedForm::from_json(j.at("form"), dim));
  throw Error(ErrorCode::ConfigInvalid, "unknown exterior kind '" + kind + "'");
}

double Exterior::value(const Point& x) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::closed_form: return form_(x);
    case Kind::none: break;
  }
  throw Error(ErrorCode::NodeOutsideDomainWithoutExteriorPolicy,
              "point (" + std::to_string(x[0]) + ", " + std::to_string(x[1]) +
                  ") is outside the grid and no exterior policy is set");
}

nlohmann::json Exterior::to_json() const {
  switch (kind_) {
    case Kind::zero: return {{"kind", "zero"}};
    case Kind::none: return {{"kind", "none"}};
    case Kind::closed_form: return {{"kind", "closed_form"}, {"form", form_.to_json()}};
  }
  return {};
}

InterpWeights interpolation_weights(const GridSpec& grid, const Exterior& exterior, const Point& x) {
  InterpWeights out;
  const double h = grid.spacing;
  std::array<int, 2> base{0, 0};
  std::array<double, 2> frac{0.0, 0.0};
  for (int a = 0; a < grid.dim; ++a) {
    const double xi = grid_coordinate(x[a], grid.origin[a], h);
    if (xi <= -1.0 || xi >= static_cast<double>(grid.shape[a])) {
      out.constant = exterior.value(x);
      return out;
    }
    const double fl = std::floor(xi);
    base[a] = static_cast<int>(fl);
    frac[a] = xi - fl;
  }
  const int corners = grid.dim == 2 ? 4 : 2;
  for (int c = 0; c < corners; ++c) {
    const int di = c & 1;
    const int dj = (c >> 1) & 1;
    double w = di ? frac[0] : 1.0 - frac[0];
    if (grid.dim == 2) w *= dj ? frac[1] : 1.0 - frac[1];
    if (w == 0.0) continue;
    const int i = base[0] + di;
    const int j = base[1] + dj;
    const bool in_grid = i >= 0 && i < grid.shape[0] && j >= 0 && j < grid.shape[1];
    if (in_grid) {
      out.index[out.count] = grid.index(i, j);
      out.weight[out.count] = w;
      ++out.count;
    } else if (exterior.kind() != Exterior::Kind::zero) {
      out.constant += w * exterior.value(grid.node(i, j));
    }
  }
  return out;
}

GridFunction::GridFunction(GridSpec grid, std::vector<double> values, Exterior exterior)
    : grid_(grid), values_(std::move(values)), exterior_(std::move(exterior)) {
  grid_.validate();
  if (values_.size() != grid_.size()) {
    throw Error(ErrorCode::InvalidArgument, "grid function: " + std::to_string(values_.size()) +
                                                " values for a grid of " + std::to_string(grid_.size()) + " nodes");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "grid function values must be finite");
  }
  if (exterior_.kind() == Exterior::Kind::closed_form && exterior_.form().dim() != grid_.dim) {
    throw Error(ErrorCode::InvalidArgument, "exterior closed form dimension differs from grid");
  }
}

GridFunction GridFunction::sample(const GridSpec& grid, const ClosedForm& f, Exterior exterior) {
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(grid.node(k));
  return GridFunction(grid, std::move(v), std::move(exterior));
}

double GridFunction::value(const Point& x) const {
  const InterpWeights w = interpolation_weights(grid_, exterior_, x);
  double acc = w.constant;
  for (int k = 0; k < w.count; ++k) acc += w.weight[k] * values_[w.index[k]];
  return acc;
}

}  // namespace freebnd
