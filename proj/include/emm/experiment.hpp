#pragma once

// Parameter sweeps, the scripted station on/off scenario, CSV emission and
// the bound report.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emm/engine.hpp"

namespace emm {

enum class SweepVariable { v, alpha, k_s, policy, epoch_scenario };

/// Accepts V, alpha, K_s, policy, epoch-scenario.
SweepVariable parse_sweep_variable(std::string_view name);
std::string_view sweep_variable_name(SweepVariable var);
/// Figure key used in plotdata file names (fig2 … fig6).
std::string_view figure_key(SweepVariable var);

struct ExperimentSpec {
  RunConfig base;
  SweepVariable variable = SweepVariable::v;
  std::vector<std::string> values;  // textual sweep values, one per point
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path out_dir = ".";

  /// Throws ConfigError for empty values/seeds or values that do not parse.
  void validate() const;
};

/// Parses "n..m" (inclusive) or a comma-separated list.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);
std::vector<std::string> split_list(std::string_view text);

/// Base config with one sweep value applied (not used for epoch-scenario).
RunConfig apply_sweep_value(const RunConfig& base, SweepVariable var, std::string_view value);

// ---------------------------------------------------------------------------
// Scripted scenario with normalized utilities (lower is better)

struct UtilityScenario {
  std::map<int, double> utility;  // bs id -> utility
  EpochSchedule epochs;
  ObservationModel observation;
  StopRule stop{StopKind::fixed_count, 20, 0.0, 10};
};

/// Three epochs of 40 subtasks: {1,2}, {1,2,3,4}, {1,2,4,5}; utilities
/// 0.5, 0.8, 0.4, 0.9, 0.7 for stations 1..5; 30% noise; K_s = 20.
UtilityScenario three_epoch_scenario();

struct UtilityStep {
  int subtask_index = 0;
  int epoch_index = 0;
  int bs_id = 0;
  double utility = 0.0;
  double observed = 0.0;
  bool handover = false;
};

std::vector<UtilityStep> run_utility_scenario(const UtilityScenario& scenario, LearningMode mode,
                                              std::uint64_t seed);

struct UtilityCurves {
  std::vector<Stat> running_utility;  // index k-1 holds subtask k
  std::vector<Stat> cumulative_handovers;
};

UtilityCurves utility_curves(const UtilityScenario& scenario, LearningMode mode,
                             std::span<const std::uint64_t> seeds);

// ---------------------------------------------------------------------------
// Files

void write_trace_csv(std::ostream& os, std::span<const TraceRecord> trace);
void write_utility_trace_csv(std::ostream& os, std::span<const UtilityStep> steps);
/// One row per run plus mean/std/min/max rows per point.
void write_summary_csv(std::ostream& os, std::span<const std::string> labels,
                       std::span<const ReplicationResult> points);

struct ExperimentResult {
  std::vector<std::string> labels;
  std::vector<ReplicationResult> points;  // empty for epoch-scenario
  std::vector<UtilityCurves> curves;      // epoch-scenario only
  std::vector<std::filesystem::path> files;
};

/// Runs every sweep point over all seeds and writes trace_<point>_<seed>.csv,
/// summary.csv and plotdata_<figure>.csv into out_dir. Throws
/// std::runtime_error when the directory cannot be written.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Human-readable bound table: inequality, measured, bound, slack, verdict.
std::string format_bound_report(const BoundReport& report);

}  // namespace emm
