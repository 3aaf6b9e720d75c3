#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "freebnd/closed_form.hpp"
#include "freebnd/common.hpp"

namespace freebnd::cli {

enum class Kind { solve_obstacle, verify_lds, expansion_decay, boundary_harnack, extension_check, liouville_fit, holder_probe };

const char* to_string(Kind k);
const std::vector<std::string>& kind_names();

struct ExperimentConfig {
  Kind kind = Kind::solve_obstacle;
  std::string name;
  std::uint64_t seed = 0;
  nlohmann::json raw;
  std::filesystem::path source;
  std::filesystem::path output_dir;
};

/// Reads and validates a config file. Every error is ConfigInvalid and names
/// the offending block. `output_override` (or FREEBND_OUTPUT_DIR) replaces
/// output.dir.
ExperimentConfig load_config(const std::filesystem::path& path, const std::string& output_override = {});

/// Checks the blocks the experiment kind needs by building every object
/// they describe.
void validate_config(const ExperimentConfig& cfg);

/// Function expressions: {tag, params} | {"sum": [f...]} | {"product": [f...]}
/// | {"scale": c, "of": f}.
ClosedForm parse_function(const nlohmann::json& j, int dim);

Point parse_point(const nlohmann::json& j);

/// j[key] as an object, or ConfigInvalid naming `block`.
const nlohmann::json& require_block(const nlohmann::json& j, const std::string& block);

template <class T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace freebnd::cli
