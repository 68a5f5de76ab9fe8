#pragma once

// Simulation driver: generates a realization from a seed, runs one policy
// over it task by task with the energy-deficit queue, and checks the
// delay/energy guarantees against a co-run lookahead oracle.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emm/bandit.hpp"
#include "emm/lyapunov.hpp"
#include "emm/policies.hpp"
#include "emm/scenario.hpp"

namespace emm {

struct WorkloadConfig {
  int task_count = 500;  // M
  int subtasks_min = 60;
  int subtasks_max = 120;
  double subtask_bits = 0.62e6;
  double intensity_min = 500.0;
  double intensity_max = 1000.0;
  double subtask_deadline = 0.15;
  double handover_cost = 0.005;
  double battery = 1000.0;  // B
  double alpha = 0.41;

  bool operator==(const WorkloadConfig&) const = default;
};

struct ControlConfig {
  int frame_length = 5;  // J
  double v = 0.01;
  /// Optional per-frame V values; empty means `v` in every frame.
  std::vector<double> v_schedule;

  bool operator==(const ControlConfig&) const = default;
};

enum class EpochMode { none, random };

/// Station on/off model during a task. In random mode each task is split into
/// `epochs_per_task` near-equal epochs; at every boundary each covering
/// station independently toggles with probability `toggle_prob`.
struct EpochModel {
  EpochMode mode = EpochMode::none;
  int epochs_per_task = 3;
  double toggle_prob = 0.3;

  bool operator==(const EpochModel&) const = default;
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::emm_gsi;
  StopRule stop{StopKind::fixed_count, 20, 0.0, 10};
  bool oracle_deadline = true;

  bool operator==(const PolicyConfig&) const = default;
};

struct RunConfig {
  std::uint64_t seed = 1;
  NetworkConfig network;
  ObservationModel observation;
  double mobility_step = 20.0;
  WorkloadConfig workload;
  ControlConfig control;
  PolicyConfig policy;
  EpochModel epochs;
  bool oracle_corun = false;

  /// Throws ConfigError describing the first inconsistency.
  void validate() const;
  ControlSchedule schedule() const;
  double total_budget() const { return workload.alpha * workload.battery; }
  double per_task_budget() const;
  /// Largest attainable task energy: every subtask at the worst in-coverage rate.
  double energy_max() const;

  bool operator==(const RunConfig&) const = default;
};

struct Realization {
  Network network;
  std::vector<TaskRealization> tasks;
  std::uint64_t hash = 0;  // fingerprint of every drawn quantity
};

/// Draws trajectory, tasks, station states and epochs from their own streams.
Realization generate_realization(const RunConfig& config);

struct TraceRecord {
  int task_id = 0;
  int subtask_index = 0;
  int epoch_index = 0;
  int bs_id = 0;
  double comp_delay = 0.0;
  double tx_delay = 0.0;
  double energy = 0.0;
  double obs_delay = 0.0;
  double obs_energy = 0.0;
  bool handover = false;
  double q_before = 0.0;
  double v = 0.0;
};

struct TaskResult {
  int task_id = 0;
  int frame = 0;
  int subtask_count = 0;
  double v = 0.0;
  double q_before = 0.0;
  TaskOutcome outcome;
  RegretLedger regret;
  std::optional<int> post_learning_bs;
  int optimal_bs = 0;
  bool init_truncated = false;
};

struct OracleRun {
  std::uint64_t realization_hash = 0;
  std::vector<FramePlan> frames;
};

struct BoundCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = true;
  bool guaranteed = true;

  double slack() const { return bound - measured; }
};

struct BoundReport {
  std::vector<BoundCheck> checks;
  std::vector<int> excluded_frames;
  std::vector<std::string> warnings;
  double learning_dev = 0.0;
  bool learning_dev_empirical = false;

  bool passed() const;
};

struct RunSummary {
  std::uint64_t seed = 0;
  PolicyKind policy = PolicyKind::emm_gsi;
  int task_count = 0;
  double avg_delay = 0.0;
  double total_energy = 0.0;
  int handover_total = 0;
  int deadline_violations = 0;  // tasks with at least one late subtask
  std::optional<double> p_suboptimal;
  std::uint64_t realization_hash = 0;
  std::vector<TaskResult> tasks;
  std::optional<OracleRun> oracle;
  std::optional<BoundReport> bound_report;
};

struct RunOutput {
  std::vector<TraceRecord> trace;
  RunSummary summary;
};

RunOutput run_simulation(const RunConfig& config);
RunOutput run_on_realization(const RunConfig& config, const Realization& realization);

/// Lookahead plans for every frame. Frames are solved in parallel.
std::vector<FramePlan> plan_frames(const RunConfig& config, const Realization& realization);
/// Serial reference for plan_frames.
std::vector<FramePlan> plan_frames_serial(const RunConfig& config, const Realization& realization);

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  int count = 0;
};

Stat describe(std::span<const double> values);

struct Aggregate {
  Stat avg_delay;
  Stat total_energy;
  Stat handover_total;
  Stat deadline_violations;
  std::optional<Stat> p_suboptimal;
};

struct ReplicationResult {
  std::vector<RunSummary> runs;  // one per seed, in seed-list order
  Aggregate aggregate;
};

/// Runs `config` once per seed; replications execute concurrently. Throws
/// std::invalid_argument for duplicate seeds.
ReplicationResult replicate(const RunConfig& config, std::span<const std::uint64_t> seeds);
/// Serial reference for replicate.
ReplicationResult replicate_serial(const RunConfig& config, std::span<const std::uint64_t> seeds);
/// Like replicate but keeps each run's trace.
std::vector<RunOutput> replicate_outputs(const RunConfig& config,
                                         std::span<const std::uint64_t> seeds);

Aggregate aggregate_runs(std::span<const RunSummary> runs);

/// Bound inputs implied by the configuration (g_star left empty).
BoundInputs bound_inputs(const RunConfig& config);

/// Checks the delay and energy guarantees of `summary` against the oracle's
/// per-frame optima on the same realization. Infeasible oracle frames are
/// excluded with a warning. Throws std::invalid_argument when the oracle was
/// run on a different realization.
BoundReport verify_bounds(const RunSummary& summary, const OracleRun& oracle,
                          const BoundInputs& inputs);

}  // namespace emm
