#include "config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <memory>

#include "freebnd/geometry.hpp"
#include "freebnd/grid_function.hpp"
#include "freebnd/kernel.hpp"
#include "freebnd/quadrature.hpp"

namespace freebnd::cli {

namespace {

struct KindInfo {
  Kind kind;
  const char* name;
  std::vector<std::string> blocks;
};

const std::vector<KindInfo>& kinds() {
  static const std::vector<KindInfo> table{
      {Kind::solve_obstacle, "solve-obstacle", {"kernel", "grid", "obstacle", "solver"}},
      {Kind::verify_lds, "verify-lds", {"kernel", "domain", "analysis"}},
      {Kind::expansion_decay, "expansion-decay", {"domain", "grid", "analysis"}},
      {Kind::boundary_harnack, "boundary-harnack", {"domain", "grid", "analysis"}},
      {Kind::extension_check, "extension-check", {"kernel", "grid", "analysis"}},
      {Kind::liouville_fit, "liouville-fit", {"analysis"}},
      {Kind::holder_probe, "holder-probe", {"analysis"}},
  };
  return table;
}

const KindInfo& info(Kind k) {
  for (const auto& i : kinds()) {
    if (i.kind == k) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown experiment kind");
}

[[noreturn]] void invalid(const std::string& block, const std::string& what) {
  throw Error(ErrorCode::ConfigInvalid, block + " block: " + what);
}

// Runs `f`, turning any library or json error into ConfigInvalid for `block`.
template <class F>
auto in_block(const std::string& block, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid && std::string(e.what()).rfind(block, 0) == 0) throw;
    invalid(block, e.what());
  } catch (const nlohmann::json::exception& e) {
    invalid(block, e.what());
  }
}

void require_keys(const nlohmann::json& j, const std::string& block, const std::vector<std::string>& keys) {
  for (const auto& k : keys) {
    if (!j.contains(k)) invalid(block, "missing key '" + k + "'");
  }
}

int kernel_dim(const nlohmann::json& raw) { return raw.at("kernel").at("dim").get<int>(); }

void check_grid(const nlohmann::json& g, int dim) {
  require_keys(g, "grid", {"lo", "hi", "spacing"});
  const Point lo = parse_point(g.at("lo")), hi = parse_point(g.at("hi"));
  GridSpec::covering(dim, lo, hi, g.at("spacing").get<double>());
}

void check_region(const nlohmann::json& r, const std::string& block) {
  require_keys(r, block, {"lo", "hi"});
  const Point lo = parse_point(r.at("lo")), hi = parse_point(r.at("hi"));
  if (!(lo[0] <= hi[0] && lo[1] <= hi[1])) invalid(block, "region lo must not exceed hi");
}

}  // namespace

const char* to_string(Kind k) { return info(k).name; }

const std::vector<std::string>& kind_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& i : kinds()) out.emplace_back(i.name);
    return out;
  }();
  return names;
}

Point parse_point(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.empty() || v.size() > 2) throw Error(ErrorCode::ConfigInvalid, "a point needs 1 or 2 coordinates");
  return {v[0], v.size() == 2 ? v[1] : 0.0};
}

const nlohmann::json& require_block(const nlohmann::json& j, const std::string& block) {
  if (!j.contains(block)) throw Error(ErrorCode::ConfigInvalid, "missing required block '" + block + "'");
  if (!j.at(block).is_object()) throw Error(ErrorCode::ConfigInvalid, block + " block: must be an object");
  return j.at(block);
}

ClosedForm parse_function(const nlohmann::json& j, int dim) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "function expression must be an object");
  if (j.contains("tag")) return ClosedForm::from_json(j, dim);
  if (j.contains("scale")) {
    const double c = j.at("scale").get<double>();
    const ClosedForm f = parse_function(j.at("of"), dim);
    return ClosedForm::custom(
        dim, [c, f](const Point& x) { return c * f(x); },
        [f](const Point& x, const Point& d, std::vector<double>& out) { f.ray_breakpoints(x, d, out); });
  }
  const bool sum = j.contains("sum");
  if (!sum && !j.contains("product")) {
    throw Error(ErrorCode::ConfigInvalid, "function expression needs one of tag, sum, product, scale");
  }
  const auto& list = j.at(sum ? "sum" : "product");
  if (!list.is_array() || list.empty()) throw Error(ErrorCode::ConfigInvalid, "sum/product needs a nonempty list");
  auto parts = std::make_shared<std::vector<ClosedForm>>();
  for (const auto& item : list) parts->push_back(parse_function(item, dim));
  auto value = [parts, sum](const Point& x) {
    double acc = sum ? 0.0 : 1.0;
    for (const auto& f : *parts) acc = sum ? acc + f(x) : acc * f(x);
    return acc;
  };
  auto breaks = [parts](const Point& x, const Point& d, std::vector<double>& out) {
    for (const auto& f : *parts) f.ray_breakpoints(x, d, out);
  };
  return ClosedForm::custom(dim, value, breaks);
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::string& output_override) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config file '" + path.string() + "'");
  ExperimentConfig cfg;
  cfg.source = path;
  try {
    cfg.raw = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  if (!cfg.raw.is_object()) throw Error(ErrorCode::ConfigInvalid, "config must be a JSON object");
  if (!cfg.raw.contains("experiment")) throw Error(ErrorCode::ConfigInvalid, "missing required key 'experiment'");
  const auto kind = cfg.raw.at("experiment").get<std::string>();
  const auto it = std::find_if(kinds().begin(), kinds().end(), [&](const KindInfo& i) { return kind == i.name; });
  if (it == kinds().end()) throw Error(ErrorCode::ConfigInvalid, "unknown experiment kind '" + kind + "'");
  cfg.kind = it->kind;
  cfg.name = get_or<std::string>(cfg.raw, "name", path.stem().string());
  try {
    cfg.seed = get_or<std::uint64_t>(cfg.raw, "seed", 0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("seed: ") + e.what());
  }

  std::filesystem::path out = "runs";
  out /= cfg.name;
  if (cfg.raw.contains("output")) {
    const auto& o = require_block(cfg.raw, "output");
    if (o.contains("dir")) out = o.at("dir").get<std::string>();
  }
  if (const char* env = std::getenv("FREEBND_OUTPUT_DIR"); env != nullptr && *env != '\0') out = std::filesystem::path(env) / cfg.name;
  if (!output_override.empty()) out = output_override;
  cfg.output_dir = out;
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  const auto& raw = cfg.raw;
  for (const auto& b : info(cfg.kind).blocks) require_block(raw, b);

  if (raw.contains("kernel")) in_block("kernel", [&] { return HomogeneousKernel::from_json(raw.at("kernel")); });
  if (raw.contains("domain")) in_block("domain", [&] { return Domain::from_json(raw.at("domain")); });
  if (raw.contains("solver")) {
    const auto& s = raw.at("solver");
    in_block("solver", [&] {
      if (s.contains("quadrature")) QuadratureScheme::from_json(s.at("quadrature"));
      if (get_or(s, "tol", 1e-10) <= 0.0) invalid("solver", "tol must be positive");
      const double omega = get_or(s, "omega", 1.5);
      if (!(omega > 0.0 && omega < 2.0)) invalid("solver", "omega must lie in (0, 2)");
      return 0;
    });
  }

  switch (cfg.kind) {
    case Kind::solve_obstacle: {
      const int dim = in_block("kernel", [&] { return kernel_dim(raw); });
      in_block("grid", [&] {
        check_grid(raw.at("grid"), dim);
        return 0;
      });
      in_block("obstacle", [&] { return parse_function(raw.at("obstacle"), dim); });
      break;
    }
    case Kind::verify_lds: {
      const int dim = kernel_dim(raw);
      in_block("analysis", [&] {
        const auto& a = raw.at("analysis");
        require_keys(a, "analysis", {"eta", "z", "distances"});
        parse_function(a.at("eta"), dim);
        parse_point(a.at("z"));
        const int j = get_or(a, "j", 0);
        if (j != 0 && j != 1) invalid("analysis", "j must be 0 or 1");
        if (a.at("distances").get<std::vector<double>>().size() < 3) invalid("analysis", "need at least 3 distances");
        return 0;
      });
      break;
    }
    case Kind::expansion_decay:
    case Kind::boundary_harnack: {
      const int dim = in_block("domain", [&] { return Domain::from_json(raw.at("domain")).dim(); });
      in_block("grid", [&] {
        check_grid(raw.at("grid"), dim);
        return 0;
      });
      in_block("analysis", [&] {
        const auto& a = raw.at("analysis");
        if (cfg.kind == Kind::expansion_decay) {
          require_keys(a, "analysis", {"s", "u", "z", "radii"});
          parse_function(a.at("u"), dim);
          parse_point(a.at("z"));
          if (a.at("radii").get<std::vector<double>>().size() < 3) invalid("analysis", "need at least 3 radii");
        } else {
          require_keys(a, "analysis", {"s", "u1", "u2", "region"});
          parse_function(a.at("u1"), dim);
          parse_function(a.at("u2"), dim);
          check_region(a.at("region"), "analysis");
        }
        return 0;
      });
      break;
    }
    case Kind::extension_check: {
      in_block("kernel", [&] {
        const auto K = HomogeneousKernel::from_json(raw.at("kernel"));
        if (K.dim() != 1 || !K.isotropic()) invalid("kernel", "extension-check needs the 1D fractional Laplacian");
        return 0;
      });
      in_block("grid", [&] {
        check_grid(raw.at("grid"), 1);
        return 0;
      });
      in_block("analysis", [&] {
        require_keys(raw.at("analysis"), "analysis", {"u"});
        return parse_function(raw.at("analysis").at("u"), 1);
      });
      break;
    }
    case Kind::liouville_fit:
      in_block("analysis", [&] {
        const auto& a = raw.at("analysis");
        require_keys(a, "analysis", {"s", "u", "degree"});
        parse_function(a.at("u"), 1);
        const std::string expect = get_or<std::string>(a, "expect", "liouville");
        if (expect != "liouville" && expect != "reject") invalid("analysis", "expect must be 'liouville' or 'reject'");
        return 0;
      });
      break;
    case Kind::holder_probe:
      in_block("analysis", [&] {
        const auto& a = raw.at("analysis");
        require_keys(a, "analysis", {"dim", "u", "region", "k"});
        parse_function(a.at("u"), a.at("dim").get<int>());
        check_region(a.at("region"), "analysis");
        if (!a.at("region").contains("spacing")) invalid("analysis", "region needs a spacing");
        return 0;
      });
      break;
  }
}

}  // namespace freebnd::cli
