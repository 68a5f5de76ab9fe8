#include "emm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace emm {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void NetworkConfig::validate() const {
  if (!(area_side > 0)) throw ConfigError("network.area_side must be positive");
  if (bs_count < 1) throw ConfigError("network.bs_count must be positive");
  if (!(coverage_radius > 0)) throw ConfigError("network.coverage_radius must be positive");
  if (!(bandwidth > 0) || !(noise_power > 0) || !(tx_power > 0) || !(max_cpu > 0))
    throw ConfigError("bandwidth, noise power, tx power and max cpu must be positive");
  if (!(min_distance > 0)) throw ConfigError("network.min_distance must be positive");
  if (interference == InterferenceModel::uniform && !(interference_max > 0))
    throw ConfigError("network.interference_max must be positive for the uniform model");
}

void ObservationModel::validate() const {
  if (!(relative_half_width >= 0.0 && relative_half_width < 1.0))
    throw ConfigError("observation.half_width must lie in [0, 1)");
}

Network generate_network(const NetworkConfig& config) {
  config.validate();
  const int side = static_cast<int>(std::lround(std::sqrt(config.bs_count)));
  if (side * side != config.bs_count)
    throw ConfigError(fmt::format("bs_count {} is not a perfect square", config.bs_count));

  Network net;
  net.config = config;
  net.pitch = config.area_side / side;
  net.stations.reserve(config.bs_count);
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      net.stations.push_back({row * side + col,
                              {net.pitch * (col + 0.5), net.pitch * (row + 0.5)}});
    }
  }
  return net;
}

void check_coverage(const NetworkConfig& config) {
  config.validate();
  const int side = static_cast<int>(std::lround(std::sqrt(config.bs_count)));
  if (side * side != config.bs_count)
    throw ConfigError(fmt::format("bs_count {} is not a perfect square", config.bs_count));
  // The farthest point from every station is a cell corner.
  const double worst = config.area_side / side / std::numbers::sqrt2;
  if (config.coverage_radius < worst)
    throw ConfigError(fmt::format(
        "coverage radius {} m leaves holes (grid needs at least {:.3f} m)",
        config.coverage_radius, worst));
}

std::vector<int> candidate_set(Point location, const Network& network) {
  std::vector<int> ids;
  for (const auto& bs : network.stations) {
    if (distance(location, bs.position) <= network.config.coverage_radius)
      ids.push_back(bs.id);
  }
  if (ids.empty())
    throw CoverageError(fmt::format("no station covers ({:.2f}, {:.2f})", location.x,
                                    location.y));
  return ids;
}

namespace {

double reflect(double v, double side) {
  // Repeated reflection handles steps longer than the area.
  for (int guard = 0; guard < 64 && (v < 0.0 || v > side); ++guard) {
    if (v < 0.0) v = -v;
    if (v > side) v = 2.0 * side - v;
  }
  return std::clamp(v, 0.0, side);
}

}  // namespace

Point step_mobility(Point location, double step, double area_side, Stream& rng) {
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  if (step == 0.0) return location;
  return {reflect(location.x + step * std::cos(angle), area_side),
          reflect(location.y + step * std::sin(angle), area_side)};
}

double path_loss_gain(double distance_m, const NetworkConfig& config) {
  const double d_km = std::max(distance_m, config.min_distance) / 1000.0;
  const double loss_db = config.pathloss_intercept + config.pathloss_slope * std::log10(d_km);
  return std::pow(10.0, -loss_db / 10.0);
}

double uplink_rate(const BsState& state, const NetworkConfig& config) {
  const double sinr =
      config.tx_power * state.channel_gain / (config.noise_power + state.interference);
  return config.bandwidth * std::log2(1.0 + sinr);
}

SubtaskCost subtask_cost(const TaskSpec& task, const BsState& state,
                         const NetworkConfig& config) {
  if (!(state.cpu_alloc > 0.0))
    throw std::invalid_argument(fmt::format("bs {}: cpu allocation must be positive", state.bs_id));
  SubtaskCost cost;
  cost.comp_delay = task.subtask_bits * task.intensity / state.cpu_alloc;
  cost.tx_delay = task.subtask_bits / uplink_rate(state, config);
  cost.energy = config.tx_power * cost.tx_delay;
  return cost;
}

BsState draw_bs_state(int bs_id, double distance_m, const NetworkConfig& config,
                      Stream& rng) {
  BsState s;
  s.bs_id = bs_id;
  s.cpu_alloc = rng.uniform_excluding_low(0.0, config.max_cpu);
  s.channel_gain = path_loss_gain(distance_m, config);
  s.interference = config.interference == InterferenceModel::uniform
                       ? rng.uniform(0.0, config.interference_max)
                       : 0.0;
  return s;
}

SubtaskCost observe(const SubtaskCost& truth, const ObservationModel& model, Stream& rng) {
  const double w = model.relative_half_width;
  auto noisy = [&](double x) { return std::max(0.0, x * (1.0 + rng.uniform(-w, w))); };
  SubtaskCost out;
  out.comp_delay = noisy(truth.comp_delay);
  out.tx_delay = noisy(truth.tx_delay);
  out.energy = noisy(truth.energy);
  return out;
}

double worst_case_rate(const NetworkConfig& config) {
  BsState edge;
  edge.channel_gain = path_loss_gain(config.coverage_radius, config);
  edge.interference =
      config.interference == InterferenceModel::uniform ? config.interference_max : 0.0;
  return uplink_rate(edge, config);
}

void validate_schedule(const EpochSchedule& schedule, int subtasks) {
  if (schedule.empty()) throw std::invalid_argument("epoch schedule is empty");
  int next = 1;
  for (const auto& e : schedule) {
    if (e.first_subtask != next || e.last_subtask < e.first_subtask)
      throw std::invalid_argument("epochs must partition the subtasks in order");
    if (e.available.empty()) throw std::invalid_argument("epoch has no available station");
    next = e.last_subtask + 1;
  }
  if (next != subtasks + 1)
    throw std::invalid_argument(
        fmt::format("epochs cover {} subtasks, task has {}", next - 1, subtasks));
}

std::size_t TaskRealization::slot(int bs_id) const {
  const auto it = std::lower_bound(candidates.begin(), candidates.end(), bs_id);
  if (it == candidates.end() || *it != bs_id)
    throw std::out_of_range(fmt::format("bs {} is not a candidate of task {}", bs_id, task.task_id));
  return static_cast<std::size_t>(it - candidates.begin());
}

}  // namespace emm
