#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "emm/policies.hpp"

namespace emm {

FrameTask make_frame_task(const TaskRealization& task) {
  FrameTask ft;
  ft.candidates = task.candidates;
  const double k = task.task.subtask_count;
  for (const auto& c : task.costs) {
    ft.delay.push_back(k * c.delay());
    ft.energy.push_back(k * c.energy);
    ft.meets_deadline.push_back(c.delay() <= task.task.subtask_deadline);
  }
  return ft;
}

namespace {

struct Option {
  int slot;
  double delay;
  double energy;
};

class BranchAndBound {
 public:
  BranchAndBound(std::span<const FrameTask> frame, double budget, bool enforce_deadline)
      : frame_(frame), budget_(budget) {
    const std::size_t j = frame.size();
    options_.resize(j);
    for (std::size_t t = 0; t < j; ++t) {
      const FrameTask& ft = frame[t];
      for (std::size_t s = 0; s < ft.candidates.size(); ++s) {
        if (enforce_deadline && !ft.meets_deadline[s]) continue;
        options_[t].push_back({static_cast<int>(s), ft.delay[s], ft.energy[s]});
      }
      // Cheapest delay first: once a branch's delay bound fails, every later
      // option of the same task fails too.
      std::stable_sort(options_[t].begin(), options_[t].end(),
                       [](const Option& a, const Option& b) { return a.delay < b.delay; });
    }
    min_energy_suffix_.assign(j + 1, 0.0);
    min_delay_suffix_.assign(j + 1, 0.0);
    for (std::size_t t = j; t-- > 0;) {
      double e = std::numeric_limits<double>::infinity();
      double d = std::numeric_limits<double>::infinity();
      for (const auto& o : options_[t]) {
        e = std::min(e, o.energy);
        d = std::min(d, o.delay);
      }
      min_energy_suffix_[t] = min_energy_suffix_[t + 1] + e;
      min_delay_suffix_[t] = min_delay_suffix_[t + 1] + d;
    }
    current_.resize(j);
  }

  bool solve() {
    if (!(min_energy_suffix_[0] < std::numeric_limits<double>::infinity())) return false;
    descend(0, 0.0, 0.0);
    return found_;
  }

  const std::vector<int>& best_slots() const { return best_; }

 private:
  void descend(std::size_t t, double delay, double energy) {
    if (t == frame_.size()) {
      if (energy <= budget_ && (!found_ || delay < best_delay_)) {
        found_ = true;
        best_delay_ = delay;
        best_ = current_;
      }
      return;
    }
    for (const Option& o : options_[t]) {
      const double d = delay + o.delay;
      if (found_ && d + min_delay_suffix_[t + 1] >= best_delay_) break;
      const double e = energy + o.energy;
      // Small slack so rounding in the suffix sum never prunes a leaf whose
      // exact in-order energy sum fits the budget.
      if (e + min_energy_suffix_[t + 1] > budget_ + 1e-12 * (1.0 + std::abs(budget_))) continue;
      current_[t] = o.slot;
      descend(t + 1, d, e);
    }
  }

  std::span<const FrameTask> frame_;
  double budget_;
  std::vector<std::vector<Option>> options_;
  std::vector<double> min_energy_suffix_;
  std::vector<double> min_delay_suffix_;
  std::vector<int> current_;
  std::vector<int> best_;
  double best_delay_ = 0.0;
  bool found_ = false;
};

}  // namespace

FramePlan jstep_lookahead(std::span<const FrameTask> frame, double frame_budget,
                          bool enforce_deadline) {
  FramePlan plan;
  if (frame.empty()) return plan;
  for (const auto& ft : frame) {
    if (ft.candidates.empty() || ft.delay.size() != ft.candidates.size() ||
        ft.energy.size() != ft.candidates.size() || ft.meets_deadline.size() != ft.candidates.size())
      throw std::invalid_argument("malformed frame task");
  }

  BranchAndBound bnb(frame, frame_budget, enforce_deadline);
  std::vector<int> slots;
  if (bnb.solve()) {
    slots = bnb.best_slots();
  } else {
    plan.feasible = false;
    for (const auto& ft : frame) {
      const auto it = std::min_element(ft.energy.begin(), ft.energy.end());
      slots.push_back(static_cast<int>(it - ft.energy.begin()));
    }
  }

  double delay = 0.0;
  for (std::size_t t = 0; t < frame.size(); ++t) {
    const auto s = static_cast<std::size_t>(slots[t]);
    plan.assignments.push_back(frame[t].candidates[s]);
    delay += frame[t].delay[s];
    plan.frame_energy += frame[t].energy[s];
  }
  plan.g_value = delay / static_cast<double>(frame.size());
  return plan;
}

}  // namespace emm
