#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "freebnd/closed_form.hpp"
#include "freebnd/field.hpp"

namespace freebnd {

/// Uniform grid of nodes origin + (i, j) * spacing. Linear storage index is
/// i * shape[1] + j (row-major over (axis 0, axis 1)); shape[1] == 1 in 1D.
struct GridSpec {
  int dim = 1;
  Point origin{0.0, 0.0};
  double spacing = 1.0;
  std::array<int, 2> shape{1, 1};

  /// Grid with nodes on [lo, hi] (per axis) at spacing h; hi is rounded to
  /// the nearest whole number of cells.
  static GridSpec covering(int dim, const Point& lo, const Point& hi, double h);
  static GridSpec from_json(const nlohmann::json& j);

  std::size_t size() const {
    return static_cast<std::size_t>(shape[0]) * static_cast<std::size_t>(shape[1]);
  }
  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(shape[1]) + static_cast<std::size_t>(j);
  }
  std::array<int, 2> unravel(std::size_t idx) const {
    return {static_cast<int>(idx / static_cast<std::size_t>(shape[1])),
            static_cast<int>(idx % static_cast<std::size_t>(shape[1]))};
  }
  Point node(int i, int j = 0) const {
    return {origin[0] + i * spacing, dim == 2 ? origin[1] + j * spacing : 0.0};
  }
  Point node(std::size_t idx) const {
    const auto ij = unravel(idx);
    return node(ij[0], ij[1]);
  }
  /// Last node along each axis.
  Point upper() const { return node(shape[0] - 1, shape[1] - 1); }
  /// Euclidean diameter of the box spanned by the nodes plus the exterior ring.
  double ring_diameter() const;
  /// Index of the node nearest to x (clamped into the grid).
  std::array<int, 2> nearest(const Point& x) const;
  bool contains_strictly(const Point& x) const;

  void validate() const;
  nlohmann::json to_json() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// What a grid function equals outside its grid. The ring of virtual nodes
/// one cell beyond the grid carries the exterior value, so the interpolant is
/// continuous across the grid edge.
class Exterior {
 public:
  enum class Kind { zero, closed_form, none };

  static Exterior zero() { return Exterior(Kind::zero, ClosedForm()); }
  static Exterior closed_form(ClosedForm f) { return Exterior(Kind::closed_form, std::move(f)); }
  static Exterior none() { return Exterior(Kind::none, ClosedForm()); }
  static Exterior from_json(const nlohmann::json& j, int dim);

  Kind kind() const { return kind_; }
  const ClosedForm& form() const { return form_; }
  double value(const Point& x) const;
  nlohmann::json to_json() const;

 private:
  Exterior(Kind k, ClosedForm f) : kind_(k), form_(std::move(f)) {}
  Kind kind_;
  ClosedForm form_;
};

/// value(x) = sum_k weight[k] * values[index[k]] + constant.
struct InterpWeights {
  std::array<std::size_t, 4> index{};
  std::array<double, 4> weight{};
  int count = 0;
  double constant = 0.0;
};

/// Piecewise (bi)linear interpolation weights on `grid` with exterior ring.
InterpWeights interpolation_weights(const GridSpec& grid, const Exterior& exterior, const Point& x);

/// Sampled field. Reports no kinks to the quadrature: the interpolant has one
/// on every grid line, and splitting at a few of them would only make rows
/// depend on position.
class GridFunction final : public Field {
 public:
  GridFunction(GridSpec grid, std::vector<double> values, Exterior exterior);

  static GridFunction sample(const GridSpec& grid, const ClosedForm& f, Exterior exterior);

  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  const Exterior& exterior() const { return exterior_; }
  double operator[](std::size_t idx) const { return values_[idx]; }
  double at(int i, int j = 0) const { return values_[grid_.index(i, j)]; }

  int dim() const override { return grid_.dim; }
  double value(const Point& x) const override;
  double derivative_step() const override { return grid_.spacing; }

 private:
  GridSpec grid_;
  std::vector<double> values_;
  Exterior exterior_;
};

}  // namespace freebnd
