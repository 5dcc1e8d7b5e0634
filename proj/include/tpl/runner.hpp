#pragma once

// Executes experiment configurations and writes CSV / JSON reports.

#include "tpl/config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tpl {

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  /// When nonempty, only these suites run (in each experiment's declared order).
  std::vector<std::string> suites;
};

/// Applies overrides in place. Throws ConfigError for an unknown suite or format.
void apply_overrides(ExperimentConfig& cfg, const RunOverrides& o);

struct RunSummary {
  std::size_t pass = 0;
  std::size_t fail = 0;
  std::size_t inconclusive = 0;
  std::size_t skipped = 0;
};

struct RunResult {
  std::vector<ReportRow> rows;
  /// Per-experiment certificates, energy reports, and probe results.
  nlohmann::json details = nlohmann::json::array();
  RunSummary summary;
};

/// Runs every experiment's suites in order. Errors from the checkers propagate.
RunResult run_experiments(const ExperimentConfig& cfg);

/// Writes <dir>/<basename>.csv and/or .json; returns the paths written.
std::vector<std::string> write_reports(const RunResult& result, const OutputSpec& out);

/// 0 when no row failed, 1 otherwise.
int exit_code(const RunSummary& s);

}  // namespace tpl
