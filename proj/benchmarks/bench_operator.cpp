#include <benchmark/benchmark.h>

#include "freebnd/operator.hpp"

using namespace freebnd;

namespace {

void BM_EvalOperatorClosedForm(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const auto K = HomogeneousKernel::fractional_laplacian(dim, 0.5);
  const ClosedFormField u(ClosedForm::from_tag("gaussian", {1.0, 1.0}, dim));
  QuadratureScheme q;
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_operator(u, K, {x, 0.1}, q));
    x = x > 1.0 ? 0.0 : x + 0.01;
  }
}
BENCHMARK(BM_EvalOperatorClosedForm)->Arg(1)->Arg(2);

void BM_EvalOperatorGrid(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const double h = dim == 1 ? 1.0 / 256.0 : 1.0 / 32.0;
  const auto grid = GridSpec::covering(dim, {-1.0, -1.0}, {1.0, 1.0}, h);
  const auto u = GridFunction::sample(grid, ClosedForm::from_tag("gaussian", {1.0, 1.0}, dim), Exterior::zero());
  const auto K = HomogeneousKernel::fractional_laplacian(dim, 0.5);
  QuadratureScheme q;
  q.inner_cutoff = 4.0 * h;
  q.truncation_radius = grid.ring_diameter();
  for (auto _ : state) benchmark::DoNotOptimize(eval_operator(u, K, {0.3, 0.1}, q));
}
BENCHMARK(BM_EvalOperatorGrid)->Arg(1)->Arg(2);

void BM_AssembleMatrix(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const double h = 2.0 / n;
  const auto grid = GridSpec::covering(dim, {-1.0, -1.0}, {1.0, 1.0}, h);
  const auto K = HomogeneousKernel::fractional_laplacian(dim, 0.5);
  QuadratureScheme q;
  q.inner_cutoff = 4.0 * h;
  q.truncation_radius = grid.ring_diameter();
  if (dim == 2) q.angular_nodes = 32;
  for (auto _ : state) benchmark::DoNotOptimize(assemble_operator_matrix(grid, K, q).data());
  state.counters["nodes"] = static_cast<double>(grid.size());
}
BENCHMARK(BM_AssembleMatrix)->Args({1, 128})->Args({1, 512})->Args({2, 16})->Args({2, 32})->Unit(benchmark::kMillisecond);

}  // namespace
