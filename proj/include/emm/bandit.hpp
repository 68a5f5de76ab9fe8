#pragma once

// UCB1 and volatile UCB1 learners minimizing a weighted cost over candidate
// stations, with stopping rules and regret accounting.

#include <compare>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace emm {

/// A station together with how many times it has (re)appeared in this task.
/// A station that leaves and comes back is a different arm.
struct ArmKey {
  int bs_id = 0;
  int appearance = 0;
  auto operator<=>(const ArmKey&) const = default;
};

struct ArmEstimate {
  ArmKey key;
  double mean_cost = 0.0;
  int pulls = 0;
  /// Subtask index just before the arm's epoch began; k - birth is the arm's
  /// age at subtask k (always >= 1 when it is selectable).
  int birth = 0;
  std::optional<int> death;  // last subtask the arm was available

  bool alive() const { return !death.has_value(); }
};

struct LearnerState {
  std::vector<ArmEstimate> arms;  // sorted by key
  int subtask_index = 0;
  double beta = 0.0;  // running maximum of observed costs
  std::optional<ArmKey> stopped_on;

  ArmEstimate* find(const ArmKey& key);
  const ArmEstimate* find(const ArmKey& key) const;
  /// Live arm currently representing bs_id, if any.
  const ArmEstimate* live(int bs_id) const;
  int total_pulls() const;
};

/// Pulls an arm (offloads one subtask) and returns the observed cost.
using ObserveFn = std::function<double(const ArmKey&)>;

/// Pulls every candidate once in ascending key order. Throws
/// std::invalid_argument for an empty candidate list.
LearnerState ucb1_init(std::span<const ArmKey> candidates, const ObserveFn& observe);

/// argmin of mean - beta * sqrt(2 ln k / pulls); ties go to the smallest key.
ArmKey ucb1_select(const LearnerState& state, int k);

/// Folds one observation into the arm's running mean and raises beta if needed.
void ucb1_update(LearnerState& state, const ArmKey& key, double observed_cost);

/// Starts an epoch beginning at subtask k: arms missing from `available` die,
/// surviving arms keep their statistics, and each newly appeared station is
/// pulled once (at most `max_pulls` of them). Returns the number of pulls made.
int vucb1_epoch_start(LearnerState& state, std::span<const int> available, int k,
                      const ObserveFn& observe,
                      int max_pulls = std::numeric_limits<int>::max());

/// argmin over live arms of mean - beta * sqrt(2 ln(k - birth) / pulls).
ArmKey vucb1_select(const LearnerState& state, int k);

enum class StopKind { never, fixed_count, gap };

struct StopRule {
  StopKind kind = StopKind::never;
  int k_s = 20;
  double epsilon = 0.0;
  int k_0 = 1;

  void validate() const;
  bool operator==(const StopRule&) const = default;
};

struct StopDecision {
  bool stop = false;
  std::optional<ArmKey> chosen;
};

/// Evaluates the stopping rule over the live arms after k subtasks.
StopDecision stop_check(const LearnerState& state, const StopRule& rule, int k);

struct RegretLedger {
  double sampling_regret = 0.0;
  double handover_regret = 0.0;
  int handover_count = 0;

  double total() const { return sampling_regret + handover_regret; }
};

struct RegretStep {
  int bs_id = 0;
  double true_cost = 0.0;  // z of the station actually used
};

/// Splits learning regret into sampling and handover parts. Throws
/// std::invalid_argument for an empty trace or mismatched lengths.
RegretLedger regret_decompose(std::span<const RegretStep> trace,
                              std::span<const double> optimal_cost, double v,
                              double handover_cost);

/// Upper bound on expected learning regret after k subtasks given the
/// normalized gaps of the suboptimal arms.
double prop1_bound(int k, std::span<const double> deltas, double beta, double v,
                   double handover_cost);

}  // namespace emm
