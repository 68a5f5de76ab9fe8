#include "emm/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace emm {

EnergyDeficitQueue queue_update(EnergyDeficitQueue q, double task_energy) {
  if (task_energy < 0.0)
    throw std::invalid_argument(fmt::format("negative task energy {}", task_energy));
  q.length = std::max(q.length + task_energy - q.per_task_budget, 0.0);
  return q;
}

double weighted_cost(double v, double q, double delay, double energy) {
  return v * delay + q * energy;
}

ControlSchedule ControlSchedule::constant(int frame_length, int frame_count, double v) {
  ControlSchedule s;
  s.frame_length = frame_length;
  s.frame_count = frame_count;
  s.v_values.assign(static_cast<std::size_t>(std::max(frame_count, 0)), v);
  return s;
}

void ControlSchedule::validate() const {
  if (frame_length < 1) throw std::invalid_argument("frame length must be >= 1");
  if (frame_count < 0) throw std::invalid_argument("frame count must be >= 0");
  if (static_cast<int>(v_values.size()) != frame_count)
    throw std::invalid_argument(fmt::format("{} V values for {} frames", v_values.size(), frame_count));
  for (double v : v_values)
    if (!(v > 0.0)) throw std::invalid_argument("V values must be positive");
}

FrameControl control_for_task(int m, const ControlSchedule& schedule) {
  if (m < 1 || m > schedule.task_count())
    throw std::out_of_range(fmt::format("task {} outside 1..{}", m, schedule.task_count()));
  const int frame = (m - 1) / schedule.frame_length;
  return {(m - 1) % schedule.frame_length == 0, schedule.v_values[frame], frame};
}

double constant_u(double energy_max, double per_task_budget) {
  if (energy_max < 0.0) throw std::invalid_argument("energy_max must be >= 0");
  const double hi = energy_max - per_task_budget;
  const double lo = per_task_budget;
  return 0.5 * std::max(hi * hi, lo * lo);
}

void BoundInputs::validate() const {
  if (u_const < 0 || learning_dev < 0 || total_budget < 0 || j < 1 || r < 0)
    throw std::invalid_argument("bound inputs must be nonnegative");
  if (static_cast<int>(v_values.size()) != r || static_cast<int>(g_star.size()) != r)
    throw std::invalid_argument("v_values and g_star must have one entry per frame");
  for (double v : v_values)
    if (!(v > 0)) throw std::invalid_argument("V values must be positive");
}

TheoremBounds theorem_bounds(const BoundInputs& in) {
  in.validate();
  TheoremBounds b;
  if (in.r == 0) {
    b.energy_bound = in.total_budget;
    return b;
  }
  const double J = in.j;
  double g_sum = 0.0, inv_v_sum = 0.0, dev_sum = 0.0;
  for (int r = 0; r < in.r; ++r) {
    g_sum += in.g_star[r];
    inv_v_sum += 1.0 / in.v_values[r];
    dev_sum += std::sqrt(2.0 * (in.u_const * J * J + in.v_values[r] * J * in.g_star[r] +
                                in.learning_dev * J));
  }
  b.delay_bound = g_sum / in.r + (in.u_const * J + in.learning_dev) / in.r * inv_v_sum;
  b.energy_bound = in.total_budget + dev_sum;
  return b;
}

FrameBound frame_bound(const BoundInputs& in, int frame) {
  in.validate();
  if (frame < 0 || frame >= in.r) throw std::out_of_range("frame index");
  const double J = in.j;
  const double v = in.v_values[frame];
  const double g = in.g_star[frame];
  FrameBound fb;
  fb.delay_sum_bound = J * g + (in.u_const * J * J + in.learning_dev * J) / v;
  fb.energy_bound = in.total_budget / in.r +
                    std::sqrt(2.0 * (in.u_const * J * J + v * J * g + in.learning_dev * J));
  return fb;
}

}  // namespace emm
