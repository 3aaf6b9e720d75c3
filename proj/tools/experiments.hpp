#pragma once

#include "config.hpp"
#include "report.hpp"

namespace freebnd::cli {

/// Executes the pipeline of cfg.kind, fills `report` and writes the CSV and
/// grid outputs into cfg.output_dir. Library errors propagate; whatever was
/// recorded before the failure stays in `report`.
void run_experiment(const ExperimentConfig& cfg, RunReport& report);

}  // namespace freebnd::cli
