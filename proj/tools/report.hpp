#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "freebnd/regularity.hpp"

namespace freebnd::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct Check {
  std::string name;
  Verdict verdict = Verdict::inconclusive;
  /// The numbers behind the verdict: measured value, tolerance, r2, ...
  nlohmann::json record;
};

struct RunReport {
  nlohmann::json config;
  std::string kind;
  std::vector<Check> checks;
  nlohmann::json tables = nlohmann::json::object();
  std::vector<std::string> outputs;
  double wall_time_s = 0.0;
  std::string status = "ok";
  std::string error;

  void add(std::string name, Verdict v, nlohmann::json record) {
    checks.push_back({std::move(name), v, std::move(record)});
  }
  /// consistent if value <= tolerance, violated otherwise.
  void add_bound(std::string name, double value, double tolerance, nlohmann::json extra = nlohmann::json::object());
  bool any_violated() const;
  nlohmann::json to_json() const;
};

/// Rows of numbers written with %.17g, so output is reproducible bit for bit.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(const std::vector<double>& values);
  /// A row whose first cell is text.
  void row(const std::string& label, const std::vector<double>& values);
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> lines_;
};

std::string format_double(double v);

void write_report(const std::filesystem::path& dir, const RunReport& report);
/// Human-readable summary of a report.json.
std::string render_report(const nlohmann::json& report);

}  // namespace freebnd::cli
