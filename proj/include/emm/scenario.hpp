#pragma once

// Network layout, user mobility, task generation and the physical
// channel/compute/energy models consumed by every policy.

#include <span>
#include <stdexcept>
#include <vector>

#include "emm/rng.hpp"

namespace emm {

/// Invalid or inconsistent configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A user location with no covering base station.
class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

enum class InterferenceModel { off, uniform };

/// Radio and compute parameters shared by all base stations. Units are SI:
/// meters, Hz, watts, cycles/s.
struct NetworkConfig {
  double area_side = 1000.0;
  int bs_count = 49;
  double coverage_radius = 150.0;
  double bandwidth = 20e6;
  double noise_power = 2e-13;
  double tx_power = 0.5;
  double pathloss_intercept = 127.0;  // dB at 1 km
  double pathloss_slope = 30.0;       // dB per decade of distance
  double max_cpu = 25e9;
  double min_distance = 1.0;
  InterferenceModel interference = InterferenceModel::uniform;
  double interference_max = 2.6e-10;

  void validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

struct BaseStation {
  int id = 0;
  Point position;
};

struct Network {
  NetworkConfig config;
  double pitch = 0.0;
  std::vector<BaseStation> stations;
};

/// One computation task. The input is split into `subtask_count` subtasks of
/// `subtask_bits` bits each; the deadline applies to every subtask.
struct TaskSpec {
  int task_id = 0;
  Point location;
  int subtask_count = 1;
  double subtask_bits = 0.62e6;
  double intensity = 500.0;  // cycles per bit
  double subtask_deadline = 0.15;
  double handover_cost = 0.005;

  double input_bits() const { return subtask_count * subtask_bits; }
  /// Whole-task deadline implied by the per-subtask deadline (reported only).
  double task_deadline() const { return subtask_count * subtask_deadline; }
};

/// Hidden per-(task, BS) state; constant while the task is processed.
struct BsState {
  int bs_id = 0;
  double cpu_alloc = 0.0;     // Hz
  double channel_gain = 0.0;  // linear
  double interference = 0.0;  // W
};

/// Cost of offloading one subtask. `energy` is always tx_power * tx_delay.
struct SubtaskCost {
  double comp_delay = 0.0;
  double tx_delay = 0.0;
  double energy = 0.0;

  double delay() const { return comp_delay + tx_delay; }
  bool operator==(const SubtaskCost&) const = default;
};

/// Multiplicative noise x * (1 + u), u ~ Uniform(-w, w), on every field.
struct ObservationModel {
  double relative_half_width = 0.3;

  void validate() const;
  bool operator==(const ObservationModel&) const = default;
};

/// Places sqrt(bs_count) x sqrt(bs_count) stations on a regular grid centered
/// in the area. Throws ConfigError for a non-square count.
Network generate_network(const NetworkConfig& config);

/// Throws ConfigError unless every point of the area lies within the
/// coverage radius of some grid station.
void check_coverage(const NetworkConfig& config);

/// Ids of the stations within coverage_radius (closed ball), ascending.
/// Throws CoverageError when the set is empty.
std::vector<int> candidate_set(Point location, const Network& network);

/// One random-walk step of length `step` in a uniform direction, reflected
/// at the area boundary.
Point step_mobility(Point location, double step, double area_side, Stream& rng);

/// Linear power gain for PL(dB) = intercept + slope * log10(d / 1 km).
/// Distances below min_distance are clamped.
double path_loss_gain(double distance_m, const NetworkConfig& config);

/// Shannon uplink rate W log2(1 + P H / (sigma^2 + I)) in bit/s.
double uplink_rate(const BsState& state, const NetworkConfig& config);

SubtaskCost subtask_cost(const TaskSpec& task, const BsState& state,
                         const NetworkConfig& config);

/// Draws the hidden state of one station for one task: CPU share uniform on
/// (0, max_cpu], deterministic path-loss gain, interference per the model.
BsState draw_bs_state(int bs_id, double distance_m, const NetworkConfig& config,
                      Stream& rng);

SubtaskCost observe(const SubtaskCost& truth, const ObservationModel& model,
                    Stream& rng);

/// Lowest uplink rate attainable anywhere inside coverage (cell edge, maximum
/// interference).
double worst_case_rate(const NetworkConfig& config);

/// Interval of subtasks [first, last] (1-based, inclusive) during which the
/// set of available stations does not change.
struct Epoch {
  int first_subtask = 1;
  int last_subtask = 1;
  std::vector<int> available;

  int length() const { return last_subtask - first_subtask + 1; }
  bool operator==(const Epoch&) const = default;
};
using EpochSchedule = std::vector<Epoch>;

/// Throws std::invalid_argument unless the epochs partition 1..subtasks and
/// every epoch has at least one station.
void validate_schedule(const EpochSchedule& schedule, int subtasks);

/// Everything the environment knows about one task: its spec, the covering
/// stations, their hidden states and the resulting true per-subtask costs.
struct TaskRealization {
  TaskSpec task;
  std::vector<int> candidates;
  std::vector<BsState> states;  // parallel to candidates
  std::vector<SubtaskCost> costs;  // parallel to candidates
  EpochSchedule epochs;

  /// Index of bs_id in `candidates`; throws std::out_of_range if absent.
  std::size_t slot(int bs_id) const;
  const BsState& state(int bs_id) const { return states[slot(bs_id)]; }
  const SubtaskCost& cost(int bs_id) const { return costs[slot(bs_id)]; }
};

}  // namespace emm
