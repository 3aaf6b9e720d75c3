// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   freebnd_acceptance [--cli PATH] [--configs DIR] [--work DIR] [--only N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "freebnd/extension.hpp"
#include "freebnd/geometry.hpp"
#include "freebnd/obstacle.hpp"
#include "freebnd/operator.hpp"
#include "freebnd/regularity.hpp"
#include "lcp_oracle.hpp"
#include "operator_oracle.hpp"

using namespace freebnd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

QuadratureScheme scheme(double eps, double R) {
  QuadratureScheme q;
  q.inner_cutoff = eps;
  q.truncation_radius = R;
  return q;
}

GridFunction sample_zero(const GridSpec& g, const std::function<double(const Point&)>& f) {
  std::vector<double> v(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) v[k] = f(g.node(k));
  return GridFunction(g, std::move(v), Exterior::zero());
}

// 1. eval_operator against the oracle, and against the Neumann trace.
Outcome operator_correctness() {
  double worst = 0.0;
  for (double s : {0.3, 0.5, 0.7}) {
    const auto K = HomogeneousKernel::fractional_laplacian(1, s);
    const ClosedFormField f(ClosedForm::from_tag("gaussian", {1.0, 1.0}, 1));
    for (double x : {0.0, 0.35, 0.7, 2.0}) {
      const double ref = oracle::fractional_laplacian_1d(oracle::gaussian_second_difference, s, x);
      worst = std::max(worst, std::abs(eval_operator(f, K, {x, 0.0}, scheme(0.05, 8.0)) - ref) / std::abs(ref));
    }
  }
  const double h = 1.0 / 256.0;
  const auto ga = ClosedForm::from_tag("gaussian", {1.0, 1.0}, 1);
  const auto u = GridFunction::sample(GridSpec::covering(1, {-4.0, 0.0}, {4.0, 0.0}, h), ga, Exterior::closed_form(ga));
  const auto tr = neumann_trace(poisson_extend(u, geometric_heights(2.0 * h, std::pow(2.0, 0.25), 12), 0.5));
  const auto K = HomogeneousKernel::fractional_laplacian(1, 0.5);
  const ClosedFormField f(ga);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < u.grid().size(); i += 4) {
    const double x = u.grid().node(i)[0];
    if (std::abs(x) > 2.0) continue;
    const double L = eval_operator(f, K, {x, 0.0}, scheme(0.05, 8.0));
    err = std::max(err, std::abs(tr[i] - L));
    scale = std::max(scale, std::abs(L));
  }
  const double trace_rel = err / scale;
  return {worst <= 1e-3 && trace_rel <= 1e-2,
          "oracle rel " + fmt("%.2e", worst) + " (<= 1e-3), trace rel " + fmt("%.2e", trace_rel) + " (<= 1e-2)"};
}

// 2. |L (x_n)_+^s| at ten interior points under two refinements.
Outcome halfspace_harmonicity() {
  bool ok = true;
  double worst_final = 0.0, worst_ratio = std::numeric_limits<double>::infinity();
  for (int dim : {1, 2}) {
    for (double s : {0.3, 0.5, 0.7}) {
      const auto K = HomogeneousKernel::fractional_laplacian(dim, s);
      const ClosedFormField u(ClosedForm::from_tag(
          "halfspace_power", dim == 1 ? std::vector<double>{s, 1.0, 0.0} : std::vector<double>{s, 0.0, 1.0, 0.0}, dim));
      double prev = 0.0, scale = 0.0;
      for (int level = 0; level < 3; ++level) {
        QuadratureScheme q = scheme(0.05 / std::pow(8.0, level), 4.0);
        q.kink_ratio = 4.0 * std::pow(8.0, level);
        q.angular_nodes = 32 << level;
        q.gauss_order = 4 + 4 * level;
        double worst = 0.0;
        for (int k = 1; k <= 10; ++k) {
          const double t = 0.1 * k;
          const Point x = dim == 1 ? Point{t, 0.0} : Point{0.3 * k - 1.5, t};
          worst = std::max(worst, std::abs(eval_operator(u, K, x, q)));
          scale = std::max(scale, std::pow(t, s));
        }
        if (level > 0) {
          worst_ratio = std::min(worst_ratio, prev / worst);
          ok = ok && prev >= 3.0 * worst;
        }
        prev = worst;
      }
      worst_final = std::max(worst_final, prev / scale);
      ok = ok && prev <= 1e-3 * scale;
    }
  }
  return {ok, "min reduction per level " + fmt("%.1f", worst_ratio) + "x (>= 3), final " + fmt("%.1e", worst_final) +
                  " x scale (<= 1e-3); dim 1,2, s 0.3,0.5,0.7"};
}

// 3. PSOR against Lemke on five 1D instances.
Outcome lcp_equivalence() {
  struct Instance {
    double s, lo, hi, h;
    ClosedForm phi;
  };
  const std::vector<Instance> cases{
      {0.3, -2.0, 2.0, 1.0 / 32.0, ClosedForm::from_tag("paraboloid", {0.25, 1.0}, 1)},
      {0.5, -2.0, 2.0, 1.0 / 32.0, ClosedForm::from_tag("paraboloid", {0.25, 1.0}, 1)},
      {0.8, -2.0, 2.0, 1.0 / 32.0, ClosedForm::from_tag("paraboloid", {0.25, 1.0}, 1)},
      {0.5, -1.5, 1.5, 1.0 / 48.0, ClosedForm::from_tag("gaussian", {0.5, 8.0}, 1)},
      {0.4, -2.0, 2.0, 1.0 / 40.0,
       ClosedForm::custom(1, [](const Point& x) { return 0.3 - std::abs(x[0] * x[0] - 0.25) - 0.2 * x[0] * x[0]; })},
  };
  const double tol = 1e-10;
  double worst = 0.0;
  std::size_t largest = 0;
  for (const auto& c : cases) {
    const auto grid = GridSpec::covering(1, {c.lo, 0.0}, {c.hi, 0.0}, c.h);
    largest = std::max(largest, grid.size());
    const auto phi = GridFunction::sample(grid, c.phi, Exterior::zero());
    const auto A = assemble_operator_matrix(grid, HomogeneousKernel::fractional_laplacian(1, c.s),
                                            scheme(4.0 * c.h, grid.ring_diameter()));
    SolverOptions opt;
    opt.tol = tol;
    const auto sol = solve_obstacle(A, phi, opt);
    const Eigen::MatrixXd M = A;
    const Eigen::Map<const Eigen::VectorXd> p(phi.values().data(), static_cast<Eigen::Index>(grid.size()));
    const auto lcp = oracle::lemke(M, M * p);
    if (!lcp.solved) return {false, "Lemke oracle failed"};
    for (std::size_t k = 0; k < grid.size(); ++k) {
      worst = std::max(worst, std::abs(sol.v[k] - lcp.z(static_cast<Eigen::Index>(k)) - phi[k]));
    }
  }
  return {worst <= 10 * tol && largest <= 200,
          "max nodal difference " + fmt("%.2e", worst) + " (<= 1e-9), largest instance " + std::to_string(largest) + " nodes"};
}

// 4. Growth at both free boundary points of the 1D bump.
Outcome regular_growth() {
  const double s = 0.5, h = 1.0 / 256.0;
  const auto grid = GridSpec::covering(1, {-2.0, 0.0}, {2.0, 0.0}, h);
  const auto phi = GridFunction::sample(grid, ClosedForm::from_tag("paraboloid", {0.25, 1.0}, 1), Exterior::zero());
  const ObstacleProblem p{HomogeneousKernel::fractional_laplacian(1, s), phi, scheme(4.0 * h, grid.ring_diameter())};
  SolverOptions opt;
  opt.tol = 1e-10;
  const auto sol = solve_obstacle(p, opt);
  const auto pts = extract_free_boundary(sol, phi);
  bool ok = pts.size() == 2;
  std::string detail = std::to_string(pts.size()) + " points:";
  for (auto pt : pts) {
    const auto c = classify_point(sol, phi, s, pt, default_radii(grid, pt.location, 6));
    ok = ok && c.growth_exponent >= 1.35 && c.growth_exponent <= 1.65 && c.fit_r2 >= 0.98;
    detail += " x=" + fmt("%.4f", c.location[0]) + " exponent " + fmt("%.3f", c.growth_exponent) + " r2 " + fmt("%.4f", c.fit_r2);
  }
  return {ok, detail + " (want [1.35, 1.65], r2 >= 0.98)"};
}

// 5. Expansion decay on the disk.
Outcome expansion_decay() {
  const double s = 0.5, h = 1.0 / 1024.0;
  const auto disk = Domain::disk({0.0, 0.0}, 1.0);
  const Point z{1.0, 0.0};
  const auto ds = ClosedForm::from_tag("ball_torsion_power", {s, 1.0, 0.0, 0.0}, 2);
  const auto rp = ClosedForm::from_tag("radial_power", {2.3, 1.0, 0.0}, 2);
  const auto g = GridSpec::covering(2, {0.4375, -0.5625}, {1.0 + 16 * h, 0.5625}, h);
  const auto d = build_regularized_distance(disk, g, 1e-10);
  const auto u = sample_zero(g, [&](const Point& x) { return ds(x) * (1.0 + x[0]) + rp(x); });
  const auto exact = sample_zero(g, [&](const Point& x) { return ds(x) * (2.0 - x[0] + 0.5 * x[1]); });
  std::vector<DsExpansion> ex;
  double model = 0.0;
  for (double r : {0.0625, 0.125, 0.25, 0.5}) {
    ex.push_back(fit_ds_expansion(u, d, s, z, r, 1));
    const auto e = fit_ds_expansion(exact, d, s, z, r, 1);
    model = std::max(model, e.residual_sup);
  }
  const auto fit = verify_expansion_decay(ex);
  return {std::abs(fit.fitted_decay - 2.3) <= 0.1 && model <= 1e-8,
          "fitted decay " + fmt("%.3f", fit.fitted_decay) + " (2.3 +- 0.1), model-class residual " + fmt("%.1e", model) +
              " (<= 1e-8)"};
}

// 6. Quotient regularity sanity.
Outcome boundary_harnack() {
  const double s = 0.5;
  const auto disk = Domain::disk({0.0, 0.0}, 1.0);
  const auto ds = ClosedForm::from_tag("ball_torsion_power", {s, 1.0, 0.0, 0.0}, 2);
  const auto rp = ClosedForm::from_tag("radial_power", {2.3, 1.0, 0.0}, 2);
  const auto g = GridSpec::covering(2, {-1.0, -1.0}, {1.0, 1.0}, 1.0 / 64.0);
  const auto d = build_regularized_distance(disk, g, 1e-10);
  const std::vector<GridFunction> corpus{
      sample_zero(g, [&](const Point& x) { return ds(x); }),
      sample_zero(g, [&](const Point& x) { return ds(x) * (1.0 + x[0]); }),
      sample_zero(g, [&](const Point& x) { return ds(x) * (1.5 + x[0]) + (ds(x) > 0 ? rp(x) : 0.0); }),
      sample_zero(g, [&](const Point& x) { return ds(x) * std::exp(x[1]); })};
  HolderRegion region;
  region.lo = {0.5, -0.5};
  region.hi = {1.0, 0.5};
  region.spacing = g.spacing;
  region.directions = {{1.0, 0.0}, {0.0, 1.0}};
  const auto steps = dyadic_steps(2 * g.spacing, 4);
  int saturated = 0;
  for (const auto& u : corpus) saturated += quotient_regularity(u, u, d, s, 0.1, region, 2, steps).estimate.saturated ? 1 : 0;
  const auto q = quotient_regularity(corpus[1], corpus[0], d, s, 0.1, region, 2, steps);
  double err = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point x = g.node(k);
    if (disk.signed_distance(x) < 4 * g.spacing) continue;
    err = std::max(err, std::abs(q.quotient[k] - (1.0 + x[0])));
  }
  return {saturated == static_cast<int>(corpus.size()) && err <= 1e-6,
          std::to_string(saturated) + "/" + std::to_string(corpus.size()) + " self-quotients saturated, (1+x1) recovered to " +
              fmt("%.1e", err) + " (<= 1e-6)"};
}

// 7. L(d^s) near the boundary.
Outcome lds_behavior() {
  const auto K = HomogeneousKernel::fractional_laplacian(2, 0.5);
  const std::vector<double> dist{0.0025, 0.005, 0.01, 0.02, 0.04, 0.08};
  const auto one = ClosedForm::from_tag("constant", {1.0}, 2);
  const auto disk = Domain::disk({0.0, 0.0}, 1.0);
  const auto r0 = verify_lds_decay(disk, K, one, 0, {1.0, 0.0}, dist, LdsOptions{});
  const bool holder_ok = r0.holder && (r0.holder->saturated || r0.holder->exponent >= 0.5);
  const auto hs = verify_lds_decay(Domain::half_space(2, {0.0, 1.0}, 0.0, {-2.0, -2.0}, {2.0, 2.0}), K, one, 0, {0.0, 0.0},
                                   dist, LdsOptions{});
  LdsOptions oblique;
  oblique.direction = Point{-std::sqrt(0.5), std::sqrt(0.5)};
  const auto r1 = verify_lds_decay(disk, K, ClosedForm::from_tag("linear", {0.0, 0.0, 1.0}, 2), 0, {1.0, 0.0}, dist, oblique);
  const bool ok = r0.verdict == Verdict::consistent && holder_ok && hs.sup_abs <= 1e-5 && r1.exponent >= 0.8;
  return {ok, std::string("disk ") + to_string(r0.verdict) + " sup " + fmt("%.4f", r0.sup_abs) +
                  (r0.holder && r0.holder->saturated ? " holder saturated" : " holder " + fmt("%.2f", r0.holder ? r0.holder->exponent : 0.0)) +
                  ", half-space sup " + fmt("%.1e", hs.sup_abs) + " (<= 1e-5), eta(z)=0 slope " + fmt("%.2f", r1.exponent) +
                  " (>= 0.8)"};
}

// 8. Liouville profiles.
Outcome liouville() {
  double coef_err = 0.0, min_reject = std::numeric_limits<double>::infinity();
  for (double s : {0.2, 0.5, 0.8}) {
    std::vector<double> x, u, bad;
    for (int i = 1; i <= 512; ++i) {
      const double t = i / 512.0;
      x.push_back(t);
      u.push_back((3.0 + 2.0 * t - 0.5 * t * t) * std::pow(t, s));
      bad.push_back(std::pow(t, s + 0.3));
    }
    const auto f = fit_halfline_profile(x, u, s, 2);
    coef_err = std::max({coef_err, std::abs(f.coefficients[0] - 3.0), std::abs(f.coefficients[1] - 2.0),
                         std::abs(f.coefficients[2] + 0.5)});
    for (int k = 0; k <= 2; ++k) min_reject = std::min(min_reject, fit_halfline_profile(x, bad, s, k).residual);
  }
  return {coef_err <= 1e-8 && min_reject >= 0.05,
          "coefficients to " + fmt("%.1e", coef_err) + " (<= 1e-8), counterexample residual >= " + fmt("%.3f", min_reject) +
              " (>= 0.05)"};
}

// 9. Finite differences and the Holder estimator.
Outcome finite_differences() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 1; k <= 4; ++k) {
    for (int trial = 0; trial < 25; ++trial) {
      std::vector<double> c(16);
      for (double& v : c) v = U(rng);
      const ClosedFormField p(ClosedForm::custom(2, [c, k](const Point& x) {
        double acc = 0.0;
        for (int a = 0; a < k; ++a) {
          for (int b = 0; a + b < k; ++b) acc += c[static_cast<std::size_t>(4 * a + b)] * std::pow(x[0], a) * std::pow(x[1], b);
        }
        return acc;
      }));
      const double t = U(rng) * 3.141592653589793;
      worst = std::max(worst, std::abs(finite_difference(p, k, {0.1 * std::cos(t), 0.1 * std::sin(t)}, {U(rng), U(rng)})));
    }
  }
  double gamma_err = 0.0;
  for (double gamma : {0.3, 0.5, 0.8}) {
    const ClosedFormField f(ClosedForm::from_tag("radial_power", {gamma, 0.0}, 1));
    HolderRegion region;
    region.lo = {-1.0, 0.0};
    region.hi = {1.0, 0.0};
    region.spacing = 1.0 / 512.0;
    gamma_err = std::max(gamma_err, std::abs(estimate_holder(f, region, 1, dyadic_steps(1.0 / 256.0, 6)).exponent - gamma));
  }
  return {worst <= 1e-13 && gamma_err <= 0.03,
          "max |Delta^k p| " + fmt("%.1e", worst) + " (<= 1e-13), exponent error " + fmt("%.1e", gamma_err) + " (<= 0.03)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

// 10. Two CLI passes over the config suite give identical CSVs.
Outcome determinism(const std::string& cli, const fs::path& configs, const fs::path& work) {
  if (cli.empty() || !fs::exists(cli)) return {false, "CLI binary not available (pass --cli)"};
  if (!fs::is_directory(configs)) return {false, "config directory '" + configs.string() + "' not found"};
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(configs)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  fs::remove_all(work);
  int compared = 0, bad_runs = 0;
  std::vector<std::string> diffs;
  for (const auto& f : files) {
    int rc[2];
    for (int pass = 0; pass < 2; ++pass) {
      const fs::path out = work / (pass == 0 ? "a" : "b") / f.stem();
      const std::string cmd = quote(cli) + " run -q " + quote(f.string()) + " -o " + quote(out.string()) + " > /dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      rc[pass] = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
    if (rc[0] != rc[1] || rc[0] < 0 || rc[0] > 1) ++bad_runs;
    const fs::path a = work / "a" / f.stem(), b = work / "b" / f.stem();
    if (!fs::is_directory(a)) continue;
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      ++compared;
      const fs::path other = b / e.path().filename();
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) diffs.push_back(f.stem().string() + "/" + e.path().filename().string());
    }
  }
  std::string detail = std::to_string(files.size()) + " configs, " + std::to_string(compared) + " CSVs compared, " +
                       std::to_string(diffs.size()) + " differ";
  if (bad_runs) detail += ", " + std::to_string(bad_runs) + " runs failed or disagreed on exit code";
  for (const auto& d : diffs) detail += " [" + d + "]";
  return {diffs.empty() && bad_runs == 0 && compared > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::map<std::string, std::string> args;
  for (int i = 1; i + 1 < argc; i += 2) args[argv[i]] = argv[i + 1];
  const std::string cli = args.count("--cli") ? args["--cli"] : "";
  const fs::path configs = args.count("--configs") ? args["--configs"] : "configs";
  const fs::path work = args.count("--work") ? fs::path(args["--work"]) : fs::temp_directory_path() / "freebnd_acceptance";
  const int only = args.count("--only") ? std::stoi(args["--only"]) : 0;

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "operator correctness", 30.0, operator_correctness},
      {2, "half-space harmonicity", 60.0, halfspace_harmonicity},
      {3, "LCP oracle equivalence", 60.0, lcp_equivalence},
      {4, "regular-point growth", 120.0, regular_growth},
      {5, "expansion decay", 60.0, expansion_decay},
      {6, "boundary Harnack sanity", 60.0, boundary_harnack},
      {7, "L(d^s) boundary behavior", 300.0, lds_behavior},
      {8, "Liouville fit", 10.0, liouville},
      {9, "finite-difference invariants", 10.0, finite_differences},
      {10, "determinism", 900.0, [&] { return determinism(cli, configs, work); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (t > c.budget_s) {
      o.pass = false;
      o.detail += "; over time budget";
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s [%.1f s, budget %.0f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), t, c.budget_s);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
