#include <benchmark/benchmark.h>

#include "freebnd/obstacle.hpp"

using namespace freebnd;

namespace {

void BM_ProjectedSor(benchmark::State& state) {
  const double h = 4.0 / static_cast<double>(state.range(0));
  const auto grid = GridSpec::covering(1, {-2.0, 0.0}, {2.0, 0.0}, h);
  const auto phi = GridFunction::sample(grid, ClosedForm::from_tag("paraboloid", {0.25, 1.0}, 1), Exterior::zero());
  QuadratureScheme q;
  q.inner_cutoff = 4.0 * h;
  q.truncation_radius = grid.ring_diameter();
  const DenseMatrix A = assemble_operator_matrix(grid, HomogeneousKernel::fractional_laplacian(1, 0.5), q);
  SolverOptions opt;
  opt.tol = 1e-10;
  int iterations = 0;
  for (auto _ : state) {
    const auto sol = solve_obstacle(A, phi, opt);
    iterations = sol.iterations;
    benchmark::DoNotOptimize(sol.v.values().data());
  }
  state.counters["iterations"] = iterations;
}
BENCHMARK(BM_ProjectedSor)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_ExtractAndClassify(benchmark::State& state) {
  const double h = 1.0 / 128.0;
  const auto grid = GridSpec::covering(1, {-2.0, 0.0}, {2.0, 0.0}, h);
  const auto phi = GridFunction::sample(grid, ClosedForm::from_tag("paraboloid", {0.25, 1.0}, 1), Exterior::zero());
  QuadratureScheme q;
  q.inner_cutoff = 4.0 * h;
  q.truncation_radius = grid.ring_diameter();
  const ObstacleProblem p{HomogeneousKernel::fractional_laplacian(1, 0.5), phi, q};
  const auto sol = solve_obstacle(p, SolverOptions{});
  for (auto _ : state) {
    for (auto pt : extract_free_boundary(sol, phi)) {
      benchmark::DoNotOptimize(classify_point(sol, phi, 0.5, pt, default_radii(grid, pt.location, 5)).growth_exponent);
    }
  }
}
BENCHMARK(BM_ExtractAndClassify);

}  // namespace
