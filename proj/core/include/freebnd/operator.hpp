#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "freebnd/field.hpp"
#include "freebnd/grid_function.hpp"
#include "freebnd/kernel.hpp"
#include "freebnd/quadrature.hpp"

namespace freebnd {

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Lu(x) = 1/2 int (2u(x) - u(x+y) - u(x-y)) K(y) dy, evaluated in polar
/// coordinates. Below the inner cutoff the second-order Taylor term is
/// integrated exactly (finite-difference Hessian with the field's derivative
/// step); beyond the truncation radius the tail follows the scheme's policy.
double eval_operator(const Field& u, const HomogeneousKernel& K, const Point& x, const QuadratureScheme& q);

/// Grid-function overload. Uses exactly the quadrature weights of
/// `operator_stencil`, so it agrees with the assembled matrix up to rounding.
/// x must lie in the closed hull of the grid.
double eval_operator(const GridFunction& u, const HomogeneousKernel& K, const Point& x, const QuadratureScheme& q);

/// Lu(x) = -(1/2s) p.v. int grad u(x+y).y K(y) dy with central-difference
/// directional derivatives. Independent of `eval_operator` apart from the
/// shared node set.
double eval_operator_gradient_form(const Field& u, const HomogeneousKernel& K, const Point& x,
                                   const QuadratureScheme& q);

/// Lu(x) = sum_k weight[k] * values[index[k]] + constant for every grid
/// function on `grid` with the given exterior.
struct OperatorStencil {
  std::vector<std::size_t> index;
  std::vector<double> weight;
  double constant = 0.0;
};
OperatorStencil operator_stencil(const GridSpec& grid, const Exterior& exterior, const HomogeneousKernel& K,
                                 const Point& x, const QuadratureScheme& q);

/// Row i holds the stencil of node i for grid functions vanishing outside
/// the grid.
DenseMatrix assemble_operator_matrix(const GridSpec& grid, const HomogeneousKernel& K, const QuadratureScheme& q,
                                     std::size_t cap = 20000);

/// int_{|y| > rho} K(y) dy using the scheme's angular rule.
double kernel_tail_mass(const HomogeneousKernel& K, double rho, int angular_nodes);

}  // namespace freebnd
