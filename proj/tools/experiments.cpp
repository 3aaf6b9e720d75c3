#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "freebnd/extension.hpp"
#include "freebnd/geometry.hpp"
#include "freebnd/grid_io.hpp"
#include "freebnd/obstacle.hpp"
#include "freebnd/operator.hpp"
#include "freebnd/regularity.hpp"

namespace freebnd::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Context {
  const ExperimentConfig& cfg;
  RunReport& report;

  const json& block(const std::string& name) const { return cfg.raw.at(name); }
  const json& analysis() const { return cfg.raw.at("analysis"); }

  void save(const Csv& csv, const std::string& file) const {
    csv.write(cfg.output_dir / file);
    report.outputs.push_back(file);
  }
  void save(const GridFunction& u, const std::string& file, const json& meta = {}) const {
    save_grid_function((cfg.output_dir / file).string(), u, meta);
    report.outputs.push_back(file);
  }
};

GridSpec grid_from(const json& g, int dim) {
  return GridSpec::covering(dim, parse_point(g.at("lo")), parse_point(g.at("hi")), g.at("spacing").get<double>());
}

QuadratureScheme quadrature_from(const json& raw, QuadratureScheme fallback) {
  if (!raw.contains("solver") || !raw.at("solver").contains("quadrature")) return fallback;
  json merged = fallback.to_json();
  merged.update(raw.at("solver").at("quadrature"));
  return QuadratureScheme::from_json(merged);
}

double log_or_nan(double v) { return v > 0.0 ? std::log(v) : std::numeric_limits<double>::quiet_NaN(); }

Verdict at_least(double value, double threshold) { return value >= threshold ? Verdict::consistent : Verdict::violated; }

void run_solve_obstacle(const Context& c) {
  const auto K = HomogeneousKernel::from_json(c.block("kernel"));
  const GridSpec grid = grid_from(c.block("grid"), K.dim());
  const ClosedForm phi_form = parse_function(c.block("obstacle"), K.dim());
  const GridFunction phi = GridFunction::sample(grid, phi_form, Exterior::zero());

  QuadratureScheme dq;
  dq.inner_cutoff = 4.0 * grid.spacing;
  dq.truncation_radius = grid.ring_diameter();
  const ObstacleProblem problem{K, phi, quadrature_from(c.cfg.raw, dq)};
  try {
    problem.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("obstacle block: ") + e.what());
  }
  const json& sj = c.block("solver");
  SolverOptions opt;
  opt.omega = get_or(sj, "omega", opt.omega);
  opt.tol = get_or(sj, "tol", opt.tol);
  opt.max_iter = get_or(sj, "max_iter", opt.max_iter);

  const ObstacleSolution sol = solve_obstacle(problem, opt);
  c.report.tables["residuals"] = sol.residuals.to_json();
  c.report.tables["iterations"] = sol.iterations;
  c.report.add_bound("complementarity", sol.residuals.complementarity, opt.tol);
  c.report.add_bound("obstacle_violation", sol.residuals.obstacle_violation, opt.tol);
  c.report.add_bound("negative_Lv", sol.residuals.negative_Lv, opt.tol);
  double vmin = 0.0, vmax = 0.0, phimax = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    vmin = std::min(vmin, sol.v[k]);
    vmax = std::max(vmax, std::abs(sol.v[k]));
    phimax = std::max(phimax, phi[k]);
  }
  c.report.add_bound("nonnegativity", -vmin, opt.tol);

  Csv solution({"x1", "x2", "phi", "v", "active", "Av"});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point x = grid.node(k);
    solution.row({x[0], x[1], phi[k], sol.v[k], sol.active[k] ? 1.0 : 0.0, sol.Av[k]});
  }
  c.save(solution, "solution.csv");
  c.save(sol.v, "solution.fbg", {{"kernel", K.to_json()}, {"tol", opt.tol}, {"iterations", sol.iterations}});

  if (phimax <= 0.0) {
    // Nothing to lift: the solution is v = 0 and the free boundary is empty.
    c.report.add("trivial_solution", vmax == 0.0 ? Verdict::consistent : Verdict::violated,
                 {{"sup_abs_v", vmax}, {"max_phi", phimax}, {"tolerance", 0.0}});
    return;
  }

  const json a = c.cfg.raw.value("analysis", json::object());
  const int levels = get_or(a, "max_levels", 6);
  const double eps_grad = get_or(a, "eps_grad", 1e-9);
  const bool has_expect = a.contains("expected_growth");
  const json expect = a.value("expected_growth", json::object());
  const std::vector<FreeBoundaryPoint> points = extract_free_boundary(sol, phi, eps_grad);
  const GridFunction w = gap_function(sol, phi);
  const double s = K.s();

  Csv fb({"index", "x1", "x2", "n1", "n2", "class", "exponent", "r2"});
  Csv growth({"index", "r", "sup", "log_r", "log_sup"});
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::string name = "growth[" + std::to_string(i) + "]";
    FreeBoundaryPoint pt = points[i];
    json rec{{"location", {pt.location[0], pt.location[1]}}};
    try {
      const auto radii = default_radii(grid, pt.location, levels);
      pt = classify_point(sol, phi, s, pt, radii);
      const GrowthFit gf = growth_exponent(w, pt.location, radii);
      for (std::size_t r = 0; r < gf.radii.size(); ++r) {
        growth.row({static_cast<double>(i), gf.radii[r], gf.sups[r], log_or_nan(gf.radii[r]), log_or_nan(gf.sups[r])});
      }
    } catch (const Error& e) {
      rec["error"] = e.what();
      c.report.add(name, Verdict::inconclusive, rec);
      fb.row(std::to_string(i), {pt.location[0], pt.location[1], pt.normal[0], pt.normal[1],
                                 static_cast<double>(static_cast<int>(PointClass::undetermined)), 0.0, 0.0});
      continue;
    }
    rec.update(pt.to_json());
    Verdict v = pt.classification == PointClass::undetermined ? Verdict::inconclusive : Verdict::consistent;
    if (has_expect) {
      const double lo = get_or(expect, "min", 1.0 + s - 0.15), hi = get_or(expect, "max", 1.0 + s + 0.15);
      const double min_r2 = get_or(expect, "min_r2", 0.98);
      rec["expected"] = {{"min", lo}, {"max", hi}, {"min_r2", min_r2}};
      v = pt.growth_exponent >= lo && pt.growth_exponent <= hi && pt.fit_r2 >= min_r2 ? Verdict::consistent
                                                                                      : Verdict::violated;
    }
    c.report.add(name, v, rec);
    fb.row(std::to_string(i), {pt.location[0], pt.location[1], pt.normal[0], pt.normal[1],
                               static_cast<double>(static_cast<int>(pt.classification)), pt.growth_exponent, pt.fit_r2});
  }
  c.save(fb, "free_boundary.csv");
  c.save(growth, "growth.csv");

  if (a.contains("normal_center")) {
    // For a radially symmetric obstacle the normal must point away from the center.
    const Point center = parse_point(a.at("normal_center"));
    double worst = 1.0;
    for (const auto& pt : points) {
      const Point r = pt.location - center;
      worst = std::min(worst, dot(pt.normal, r) / norm(r));
    }
    const double t = get_or(a, "min_normal_alignment", 0.99);
    c.report.add("normal_alignment", at_least(worst, t), {{"value", worst}, {"threshold", t}, {"points", points.size()}});
  }
}

void run_verify_lds(const Context& c) {
  const auto K = HomogeneousKernel::from_json(c.block("kernel"));
  const Domain domain = Domain::from_json(c.block("domain"));
  const json& a = c.analysis();
  const ClosedForm eta = parse_function(a.at("eta"), K.dim());
  LdsOptions opt;
  opt.quadrature = quadrature_from(c.cfg.raw, opt.quadrature);
  if (a.contains("direction")) opt.direction = parse_point(a.at("direction"));
  opt.noise_floor = get_or(a, "noise_floor", opt.noise_floor);
  opt.tolerance = get_or(a, "tolerance", opt.tolerance);
  opt.holder_threshold = get_or(a, "holder_threshold", opt.holder_threshold);
  const int j = get_or(a, "j", 0);
  const auto r = verify_lds_decay(domain, K, eta, j, parse_point(a.at("z")), a.at("distances").get<std::vector<double>>(), opt);

  c.report.add(j == 0 ? "lds_bounded_holder" : "lds_derivative_decay", r.verdict, r.to_json());
  if (a.contains("zero_tolerance")) c.report.add_bound("vanishing", r.sup_abs, a.at("zero_tolerance").get<double>());
  if (a.contains("min_slope")) {
    const double m = a.at("min_slope").get<double>();
    c.report.add("decay_slope", at_least(r.exponent, m), {{"value", r.exponent}, {"threshold", m}, {"r2", r.r2}});
  }
  Csv csv({"t", "value", "log_t", "log_abs_value"});
  for (std::size_t i = 0; i < r.distances.size(); ++i) {
    csv.row({r.distances[i], r.values[i], std::log(r.distances[i]), log_or_nan(std::abs(r.values[i]))});
  }
  c.save(csv, "lds.csv");
}

void run_expansion_decay(const Context& c) {
  const Domain domain = Domain::from_json(c.block("domain"));
  const GridSpec grid = grid_from(c.block("grid"), domain.dim());
  const json& a = c.analysis();
  const double s = a.at("s").get<double>();
  const int degree = get_or(a, "degree", 1);
  const Point z = parse_point(a.at("z"));
  const auto d = build_regularized_distance(domain, grid, get_or(a, "distance_tol", 1e-10));
  const GridFunction u = GridFunction::sample(grid, parse_function(a.at("u"), domain.dim()), Exterior::zero());
  c.report.tables["distance"] = d.describe();

  std::vector<DsExpansion> ex;
  Csv csv({"r", "residual_sup", "u_sup", "orthogonality", "nodes", "coefficients..."});
  double ortho = 0.0, rel_resid = 0.0;
  for (double r : a.at("radii").get<std::vector<double>>()) {
    ex.push_back(fit_ds_expansion(u, d, s, z, r, degree));
    const auto& e = ex.back();
    ortho = std::max(ortho, e.orthogonality);
    rel_resid = std::max(rel_resid, e.residual_sup / std::max(e.u_sup, 1e-300));
    std::vector<double> row{r, e.residual_sup, e.u_sup, e.orthogonality, static_cast<double>(e.nodes)};
    row.insert(row.end(), e.coefficients.begin(), e.coefficients.end());
    csv.row(row);
  }
  c.save(csv, "expansion.csv");
  const DecayFit fit = verify_expansion_decay(ex);
  json fj = fit.to_json();
  c.report.tables["decay"] = fj;
  c.report.add_bound("orthogonality", ortho, get_or(a, "orthogonality_tolerance", 1e-8));
  if (get_or(a, "exact_model", false)) {
    c.report.add_bound("model_residual", rel_resid, get_or(a, "model_tolerance", 1e-8));
  } else if (a.contains("expected_decay")) {
    const double e = a.at("expected_decay").get<double>(), tol = get_or(a, "decay_tolerance", 0.1);
    fj["expected"] = e;
    c.report.add_bound("decay_exponent", std::abs(fit.fitted_decay - e), tol, fj);
  } else {
    c.report.add("decay_exponent", Verdict::inconclusive, fj);
  }
}

std::vector<Point> directions_from(const json& region, int dim) {
  std::vector<Point> dirs;
  if (region.contains("directions")) {
    for (const auto& d : region.at("directions")) dirs.push_back(parse_point(d));
  } else {
    dirs.push_back({1.0, 0.0});
    if (dim == 2) dirs.push_back({0.0, 1.0});
  }
  return dirs;
}

void run_boundary_harnack(const Context& c) {
  const Domain domain = Domain::from_json(c.block("domain"));
  const GridSpec grid = grid_from(c.block("grid"), domain.dim());
  const json& a = c.analysis();
  const double s = a.at("s").get<double>();
  const auto d = build_regularized_distance(domain, grid, get_or(a, "distance_tol", 1e-10));
  const GridFunction u1 = GridFunction::sample(grid, parse_function(a.at("u1"), domain.dim()), Exterior::zero());
  const GridFunction u2 = GridFunction::sample(grid, parse_function(a.at("u2"), domain.dim()), Exterior::zero());

  const json& rj = a.at("region");
  HolderRegion region;
  region.lo = parse_point(rj.at("lo"));
  region.hi = parse_point(rj.at("hi"));
  region.spacing = grid.spacing;
  region.directions = directions_from(rj, domain.dim());
  const int k = get_or(a, "k", 2);
  const auto steps = dyadic_steps(get_or(a, "h0_cells", 2.0) * grid.spacing, get_or(a, "levels", 4));

  std::optional<QuotientResult> qr;
  try {
    qr.emplace(quotient_regularity(u1, u2, d, s, get_or(a, "c1", 0.1), region, k, steps));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NondegeneracyViolated) throw;
    c.report.add("nondegeneracy", Verdict::violated, {{"error", e.what()}});
    return;
  }
  const QuotientResult& q = *qr;
  c.report.add("nondegeneracy", Verdict::consistent, {{"c1", get_or(a, "c1", 0.1)}});
  const double min_exp = get_or(a, "min_exponent", 0.5);
  json hj = q.estimate.to_json();
  hj["threshold"] = min_exp;
  c.report.add("quotient_holder", q.estimate.saturated ? Verdict::consistent : at_least(q.estimate.exponent, min_exp), hj);

  if (a.contains("expected_quotient")) {
    const ClosedForm expect = parse_function(a.at("expected_quotient"), domain.dim());
    const double margin = get_or(a, "margin_cells", 4.0) * grid.spacing;
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Point x = grid.node(i);
      if (domain.signed_distance(x) < margin) continue;
      err = std::max(err, std::abs(q.quotient[i] - expect(x)));
    }
    c.report.add_bound("quotient_profile", err, get_or(a, "quotient_tolerance", 1e-6), {{"margin", margin}});
  }

  Csv holder({"h", "sup", "log_h", "log_sup"});
  for (std::size_t i = 0; i < q.estimate.steps.size(); ++i) {
    holder.row({q.estimate.steps[i], q.estimate.sups[i], std::log(q.estimate.steps[i]), log_or_nan(q.estimate.sups[i])});
  }
  c.save(holder, "holder.csv");
  Csv quotient({"x1", "x2", "quotient"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.node(i);
    if (d.field[i] > 0.0) quotient.row({x[0], x[1], q.quotient[i]});
  }
  c.save(quotient, "quotient.csv");
}

void run_extension_check(const Context& c) {
  const auto K = HomogeneousKernel::from_json(c.block("kernel"));
  const GridSpec grid = grid_from(c.block("grid"), 1);
  const json& a = c.analysis();
  const double s = K.s(), h = grid.spacing;
  const ClosedForm form = parse_function(a.at("u"), 1);
  const GridFunction u = GridFunction::sample(grid, form, Exterior::closed_form(form));
  const json hj = a.value("heights", json::object());
  const auto heights =
      geometric_heights(get_or(hj, "y_min_cells", 2.0) * h, get_or(hj, "ratio", std::pow(2.0, 0.25)), get_or(hj, "count", 12));
  const ExtensionField ext = poisson_extend(u, heights, s);
  const GridFunction trace = neumann_trace(ext);
  c.save(trace, "trace.fbg", ext.sidecar());

  QuadratureScheme dq;
  dq.truncation_radius = 8.0;
  const QuadratureScheme q = quadrature_from(c.cfg.raw, dq);
  const ClosedFormField f(form);
  const double frac = get_or(a, "central_fraction", 0.5);
  const double mid = 0.5 * (grid.node(0)[0] + grid.upper()[0]), half = 0.5 * frac * (grid.upper()[0] - grid.node(0)[0]);
  const int stride = get_or(a, "stride", 1);
  double err = 0.0, scale = 0.0;
  Csv csv({"x", "trace", "operator"});
  for (std::size_t i = 0; i < grid.size(); i += static_cast<std::size_t>(stride)) {
    const double x = grid.node(i)[0];
    if (std::abs(x - mid) > half) continue;
    const double L = eval_operator(f, K, {x, 0.0}, q);
    err = std::max(err, std::abs(trace[i] - L));
    scale = std::max(scale, std::abs(L));
    csv.row({x, trace[i], L});
  }
  c.save(csv, "trace.csv");
  c.report.add_bound("trace_vs_operator", err / std::max(scale, 1e-300), get_or(a, "rel_tolerance", 1e-2),
                     {{"abs_error", err}, {"scale", scale}});
  c.report.tables["harmonicity_residual"] = weighted_harmonicity_residual(ext);
  c.report.tables["sidecar"] = ext.sidecar();

  Csv table({"x", "y", "value"});
  for (std::size_t k = 0; k < heights.size(); ++k) {
    for (std::size_t i = 0; i < grid.size(); i += static_cast<std::size_t>(stride)) table.row({grid.node(i)[0], heights[k], ext.values[k][i]});
  }
  c.save(table, "extension.csv");

  if (get_or(a, "calibrate", false)) {
    const Calibration cal = calibrate_extension_constant(s, h, q);
    json cj = cal.to_json();
    c.report.add_bound("calibration", std::abs(cal.a_fit / cal.a_analytic - 1.0), get_or(a, "calibration_tolerance", 1e-2), cj);
  }
}

void run_liouville_fit(const Context& c) {
  const json& a = c.analysis();
  const double s = a.at("s").get<double>(), X = get_or(a, "X", 1.0);
  const int n = get_or(a, "samples", 512), k = a.at("degree").get<int>();
  const ClosedForm form = parse_function(a.at("u"), 1);
  std::vector<double> x(static_cast<std::size_t>(n)), u(x.size());
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = X * (i + 1) / n;
    u[static_cast<std::size_t>(i)] = form({x[static_cast<std::size_t>(i)], 0.0});
  }
  const HalflineFit fit = fit_halfline_profile(x, u, s, k);
  json fj = fit.to_json();
  if (get_or<std::string>(a, "expect", "liouville") == "liouville") {
    c.report.add_bound("liouville_residual", fit.residual, get_or(a, "residual_tolerance", 1e-6), fj);
    if (a.contains("expected_coefficients")) {
      auto want = a.at("expected_coefficients").get<std::vector<double>>();
      want.resize(fit.coefficients.size(), 0.0);
      double err = 0.0;
      for (std::size_t i = 0; i < want.size(); ++i) err = std::max(err, std::abs(fit.coefficients[i] - want[i]));
      c.report.add_bound("coefficients", err, get_or(a, "coefficient_tolerance", 1e-8));
    }
  } else {
    const double t = get_or(a, "reject_threshold", 0.05);
    fj["threshold"] = t;
    c.report.add("not_liouville", at_least(fit.residual, t), fj);
  }
  Csv csv({"x", "u_over_xs", "p"});
  for (std::size_t i = 0; i < x.size(); ++i) {
    double p = 0.0;
    for (std::size_t m = fit.coefficients.size(); m-- > 0;) p = p * x[i] + fit.coefficients[m];
    csv.row({x[i], u[i] / std::pow(x[i], s), p});
  }
  c.save(csv, "profile.csv");
}

void run_holder_probe(const Context& c) {
  const json& a = c.analysis();
  const int dim = a.at("dim").get<int>(), k = a.at("k").get<int>();
  const ClosedFormField f(parse_function(a.at("u"), dim));
  const json& rj = a.at("region");
  HolderRegion region;
  region.lo = parse_point(rj.at("lo"));
  region.hi = parse_point(rj.at("hi"));
  region.spacing = rj.at("spacing").get<double>();
  region.directions = directions_from(rj, dim);
  if (dim == 2 && get_or(a, "random_directions", 0) > 0) {
    // Angles from the raw 53 high bits, so the sequence does not depend on
    // the standard library's distribution implementation.
    std::mt19937_64 rng(c.cfg.seed);
    for (int i = 0; i < a.at("random_directions").get<int>(); ++i) {
      const double t = std::numbers::pi * static_cast<double>(rng() >> 11) * 0x1p-53;
      region.directions.push_back({std::cos(t), std::sin(t)});
    }
  }
  const auto steps = dyadic_steps(a.at("h0").get<double>(), get_or(a, "levels", 6));
  const HolderEstimate est = estimate_holder(f, region, k, steps, get_or(a, "noise_floor", 1e-13));
  json ej = est.to_json();
  json dirs = json::array();
  for (const auto& d : region.directions) dirs.push_back({d[0], d[1]});
  c.report.tables["directions"] = dirs;
  if (a.contains("expected_exponent")) {
    const double e = a.at("expected_exponent").get<double>();
    ej["expected"] = e;
    c.report.add_bound("holder_exponent", std::abs(est.exponent - e), get_or(a, "tolerance", 0.03), ej);
  } else if (a.contains("annihilation_tolerance")) {
    double m = 0.0;
    for (double v : est.sups) m = std::max(m, v);
    c.report.add_bound("annihilation", m, a.at("annihilation_tolerance").get<double>(), ej);
  } else {
    c.report.add("holder_exponent", Verdict::inconclusive, ej);
  }
  Csv csv({"h", "sup", "log_h", "log_sup"});
  for (std::size_t i = 0; i < est.steps.size(); ++i) {
    csv.row({est.steps[i], est.sups[i], std::log(est.steps[i]), log_or_nan(est.sups[i])});
  }
  c.save(csv, "holder.csv");
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg, RunReport& report) {
  fs::create_directories(cfg.output_dir);
  const Context c{cfg, report};
  switch (cfg.kind) {
    case Kind::solve_obstacle: return run_solve_obstacle(c);
    case Kind::verify_lds: return run_verify_lds(c);
    case Kind::expansion_decay: return run_expansion_decay(c);
    case Kind::boundary_harnack: return run_boundary_harnack(c);
    case Kind::extension_check: return run_extension_check(c);
    case Kind::liouville_fit: return run_liouville_fit(c);
    case Kind::holder_probe: return run_holder_probe(c);
  }
}

}  // namespace freebnd::cli
