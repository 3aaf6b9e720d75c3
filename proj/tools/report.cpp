#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace freebnd::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void RunReport::add_bound(std::string name, double value, double tolerance, nlohmann::json extra) {
  extra["value"] = value;
  extra["tolerance"] = tolerance;
  add(std::move(name), value <= tolerance ? Verdict::consistent : Verdict::violated, std::move(extra));
}

bool RunReport::any_violated() const {
  for (const auto& c : checks) {
    if (c.verdict == Verdict::violated) return true;
  }
  return false;
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json checks_j = nlohmann::json::array();
  int counts[3] = {0, 0, 0};
  for (const auto& c : checks) {
    checks_j.push_back({{"name", c.name}, {"verdict", to_string(c.verdict)}, {"record", c.record}});
    ++counts[static_cast<int>(c.verdict)];
  }
  nlohmann::json j{{"tool_version", kToolVersion},
                   {"experiment", kind},
                   {"status", status},
                   {"config", config},
                   {"checks", checks_j},
                   {"summary", {{"consistent", counts[0]}, {"inconclusive", counts[1]}, {"violated", counts[2]}}},
                   {"tables", tables},
                   {"outputs", outputs},
                   {"wall_time_s", wall_time_s}};
  if (!error.empty()) j["error"] = error;
  return j;
}

void Csv::row(const std::vector<double>& values) {
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format_double(values[i]);
  }
  lines_.push_back(std::move(line));
}

void Csv::row(const std::string& label, const std::vector<double>& values) {
  std::string line = label;
  for (double v : values) line += ',' + format_double(v);
  lines_.push_back(std::move(line));
}

void Csv::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
  out << '\n';
  for (const auto& l : lines_) out << l << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

void write_report(const std::filesystem::path& dir, const RunReport& report) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "report.json", std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write report in '" + dir.string() + "'");
  out << report.to_json().dump(2) << '\n';
}

namespace {

std::string compact(const nlohmann::json& j) {
  std::ostringstream ss;
  bool first = true;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_structured()) continue;
    ss << (first ? "" : ", ") << it.key() << "=";
    if (it.value().is_number_float()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4g", it.value().get<double>());
      ss << buf;
    } else {
      ss << it.value().dump();
    }
    first = false;
  }
  return ss.str();
}

}  // namespace

std::string render_report(const nlohmann::json& r) {
  std::ostringstream ss;
  ss << "experiment: " << r.value("experiment", "?") << "  (tool " << r.value("tool_version", "?") << ")\n";
  ss << "status:     " << r.value("status", "?");
  if (r.contains("error")) ss << "  error: " << r.at("error").get<std::string>();
  ss << "\n";
  if (r.contains("wall_time_s")) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", r.at("wall_time_s").get<double>());
    ss << "wall time:  " << buf << " s\n";
  }
  ss << "checks:\n";
  for (const auto& c : r.value("checks", nlohmann::json::array())) {
    char head[96];
    std::snprintf(head, sizeof head, "  %-13s %s", c.at("verdict").get<std::string>().c_str(),
                  c.at("name").get<std::string>().c_str());
    ss << head << "\n      " << compact(c.at("record")) << "\n";
  }
  if (r.contains("summary")) {
    const auto& s = r.at("summary");
    ss << "summary:    " << s.value("consistent", 0) << " consistent, " << s.value("inconclusive", 0) << " inconclusive, "
       << s.value("violated", 0) << " violated\n";
  }
  for (const auto& o : r.value("outputs", nlohmann::json::array())) ss << "output:     " << o.get<std::string>() << "\n";
  return ss.str();
}

}  // namespace freebnd::cli
