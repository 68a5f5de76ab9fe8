#pragma once

// Virtual energy-deficit queue, the drift-plus-penalty weighted cost and the
// closed-form delay/energy guarantees of the online controller.

#include <vector>

namespace emm {

/// q(m): accumulated energy use in excess of the per-task share of the budget.
struct EnergyDeficitQueue {
  double length = 0.0;           // J, never negative
  double per_task_budget = 0.0;  // alpha * B / M
};

/// max(q + E - budget, 0). Throws std::invalid_argument for negative energy.
EnergyDeficitQueue queue_update(EnergyDeficitQueue q, double task_energy);

/// z = v * delay + q * energy.
double weighted_cost(double v, double q, double delay, double energy);

/// Frames of `frame_length` tasks; v_values[r] is the control parameter used
/// throughout frame r.
struct ControlSchedule {
  int frame_length = 5;
  int frame_count = 1;
  std::vector<double> v_values{0.01};

  static ControlSchedule constant(int frame_length, int frame_count, double v);
  int task_count() const { return frame_length * frame_count; }
  void validate() const;
};

struct FrameControl {
  bool reset = false;  // first task of a frame: queue is cleared
  double v = 0.0;
  int frame = 0;  // 0-based
};

/// Control for task m (1-based). Throws std::out_of_range outside 1..M.
FrameControl control_for_task(int m, const ControlSchedule& schedule);

/// U = max over attainable task energies E in [0, energy_max] of (E - b)^2 / 2.
double constant_u(double energy_max, double per_task_budget);

struct BoundInputs {
  double u_const = 0.0;
  int j = 1;  // tasks per frame
  int r = 1;  // frames
  std::vector<double> v_values;
  std::vector<double> g_star;  // oracle average delay per frame
  double learning_dev = 0.0;   // per-task learning deviation (0 with exact state)
  double total_budget = 0.0;   // alpha * B

  void validate() const;
};

struct TheoremBounds {
  double delay_bound = 0.0;   // on (1/M) sum of task delays
  double energy_bound = 0.0;  // on total energy
};

TheoremBounds theorem_bounds(const BoundInputs& inputs);

/// Per-frame form the aggregate bounds are summed from: total delay of the
/// frame's J tasks and total energy of the frame.
struct FrameBound {
  double delay_sum_bound = 0.0;
  double energy_bound = 0.0;
};

FrameBound frame_bound(const BoundInputs& inputs, int frame);

}  // namespace emm
