#pragma once

// Decision strategies: the drift-plus-penalty controller with exact state,
// the bandit-driven variants with local state only, the three benchmarks and
// the J-step lookahead oracle.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "emm/bandit.hpp"
#include "emm/scenario.hpp"

namespace emm {

enum class PolicyKind {
  emm_gsi,
  emm_lsi,
  emm_lsi_v,
  delay_optimal,
  energy_optimal,
  radio_lsi,
  jstep_oracle,
};

std::string_view policy_name(PolicyKind kind);
/// Throws ConfigError for an unknown name.
PolicyKind parse_policy(std::string_view name);
/// Policies that learn from noisy observations instead of reading BS state.
bool uses_local_state(PolicyKind kind);

struct Decision {
  int task_id = 0;
  int subtask_index = 0;  // 1-based
  int epoch_index = 0;    // 0-based
  int bs_id = 0;
  bool is_handover = false;
};

struct TaskOutcome {
  double total_delay = 0.0;
  double total_energy = 0.0;
  int handover_count = 0;
  bool deadline_violated = false;
};

/// Recomputes delay (with handover cost), energy and deadline status of a
/// per-subtask station sequence from the task's true costs.
TaskOutcome evaluate_assignment(const TaskRealization& task, std::span<const int> bs_per_subtask);

/// Expands a sequence of stations into decisions with handover flags.
std::vector<Decision> make_decisions(const TaskRealization& task, std::span<const int> bs_per_subtask,
                                     std::span<const int> epoch_per_subtask = {});

struct GsiChoice {
  int bs_id = 0;
  bool deadline_violated = false;
};

/// Among candidates meeting the subtask deadline, minimizes v*d + q*e; falls
/// back to the fastest candidate (flagged) when none qualifies.
GsiChoice emm_gsi_decide(const TaskRealization& task, std::span<const int> candidates, double v,
                         double q);
int delay_optimal_decide(const TaskRealization& task, std::span<const int> candidates);
int energy_optimal_decide(const TaskRealization& task, std::span<const int> candidates);
/// Station minimizing the true weighted cost, ignoring deadlines.
int weighted_optimal(const TaskRealization& task, std::span<const int> candidates, double v,
                     double q);

/// Source of observations for a learner: pulling an arm offloads one subtask.
class ArmEnvironment {
 public:
  virtual ~ArmEnvironment() = default;
  virtual double pull(int bs_id) = 0;
};

enum class LearningMode {
  restart,        // fresh UCB1 at every epoch
  volatile_arms,  // VUCB1: keep statistics of surviving stations
};

struct LearningStep {
  int subtask_index = 0;
  int epoch_index = 0;
  int bs_id = 0;
  bool learning = true;  // false once the stop rule has fired
};

struct LearningResult {
  std::vector<LearningStep> steps;
  LearnerState final_state;
  int post_learning_bs = 0;  // stopped arm, else best empirical mean at the end
  bool init_truncated = false;
};

/// Runs one task through the learner epoch by epoch. Stop rules count
/// subtasks from the start of the current epoch and are re-armed when a new
/// epoch begins.
LearningResult run_learning_task(const EpochSchedule& epochs, ArmEnvironment& env,
                                 const StopRule& stop, LearningMode mode);

/// Which observed quantity the learner minimizes.
enum class LearnedCost { weighted, energy_only };

/// Observes true subtask costs through the noise model and reports either
/// v*d + q*e or the energy alone.
class NoisyTaskEnvironment final : public ArmEnvironment {
 public:
  NoisyTaskEnvironment(const TaskRealization& task, const ObservationModel& model, Stream& noise,
                       double v, double q, LearnedCost cost);
  double pull(int bs_id) override;
  const std::vector<SubtaskCost>& observations() const { return observed_; }

 private:
  const TaskRealization& task_;
  ObservationModel model_;
  Stream& noise_;
  double v_;
  double q_;
  LearnedCost cost_;
  std::vector<SubtaskCost> observed_;
};

struct LsiTaskRun {
  std::vector<Decision> decisions;
  std::vector<SubtaskCost> observed;
  TaskOutcome outcome;
  RegretLedger regret;
  int post_learning_bs = 0;
  int optimal_bs = 0;  // true weighted-cost optimum of the last epoch
  bool init_truncated = false;
};

/// Learning regret of a station sequence against the per-epoch weighted-cost
/// optimum.
RegretLedger learning_regret(const TaskRealization& task, std::span<const int> bs_per_subtask,
                             double v, double q);

/// UCB1 learning on the weighted cost (restarts at epoch changes).
LsiTaskRun emm_lsi_run_task(const TaskRealization& task, const ObservationModel& model,
                            Stream& noise, double v, double q, const StopRule& stop);
/// VUCB1 learning on the weighted cost across the task's epochs.
LsiTaskRun emm_lsi_v_run_task(const TaskRealization& task, const ObservationModel& model,
                              Stream& noise, double v, double q, const StopRule& stop);
/// UCB1 learning on observed energy only (channel-quality learner).
LsiTaskRun radio_lsi_run_task(const TaskRealization& task, const ObservationModel& model,
                              Stream& noise, double v, double q, const StopRule& stop);

// ---------------------------------------------------------------------------
// J-step lookahead oracle

/// One task of a frame as seen by the oracle: whole-task delay and energy of
/// serving it from each candidate.
struct FrameTask {
  std::vector<int> candidates;
  std::vector<double> delay;
  std::vector<double> energy;
  std::vector<bool> meets_deadline;
};

FrameTask make_frame_task(const TaskRealization& task);

struct FramePlan {
  std::vector<int> assignments;  // bs id per task
  double g_value = 0.0;          // average task delay of the frame
  double frame_energy = 0.0;
  bool feasible = true;
};

/// Exact minimizer of the frame's average delay under the frame energy
/// budget (and per-subtask deadlines when enforced), by depth-first branch
/// and bound. An infeasible frame returns the minimum-energy assignment with
/// feasible = false.
FramePlan jstep_lookahead(std::span<const FrameTask> frame, double frame_budget,
                          bool enforce_deadline = true);

}  // namespace emm
