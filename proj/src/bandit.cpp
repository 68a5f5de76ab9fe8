#include "emm/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace emm {

ArmEstimate* LearnerState::find(const ArmKey& key) {
  auto it = std::lower_bound(arms.begin(), arms.end(), key,
                             [](const ArmEstimate& a, const ArmKey& k) { return a.key < k; });
  return (it != arms.end() && it->key == key) ? &*it : nullptr;
}

const ArmEstimate* LearnerState::find(const ArmKey& key) const {
  return const_cast<LearnerState*>(this)->find(key);
}

const ArmEstimate* LearnerState::live(int bs_id) const {
  for (const auto& a : arms)
    if (a.key.bs_id == bs_id && a.alive()) return &a;
  return nullptr;
}

int LearnerState::total_pulls() const {
  int n = 0;
  for (const auto& a : arms) n += a.pulls;
  return n;
}

namespace {

void insert_arm(LearnerState& state, ArmEstimate arm) {
  auto it = std::lower_bound(state.arms.begin(), state.arms.end(), arm.key,
                             [](const ArmEstimate& a, const ArmKey& k) { return a.key < k; });
  state.arms.insert(it, std::move(arm));
}

// Shared argmin over live arms; `age` maps an arm to the log argument.
template <typename AgeFn>
ArmKey lower_index_argmin(const LearnerState& state, AgeFn age) {
  const ArmEstimate* best = nullptr;
  double best_index = 0.0;
  for (const auto& a : state.arms) {
    if (!a.alive()) continue;
    if (a.pulls < 1)
      throw std::logic_error(fmt::format("arm (bs {}, #{}) was never initialized",
                                         a.key.bs_id, a.key.appearance));
    const double n = age(a);
    if (n < 1.0) throw std::logic_error("arm age must be at least 1");
    const double index = a.mean_cost - state.beta * std::sqrt(2.0 * std::log(n) / a.pulls);
    // Strict comparison: arms are visited in key order, so ties keep the
    // smallest key.
    if (best == nullptr || index < best_index) {
      best = &a;
      best_index = index;
    }
  }
  if (best == nullptr) throw std::logic_error("no live arm to select");
  return best->key;
}

}  // namespace

LearnerState ucb1_init(std::span<const ArmKey> candidates, const ObserveFn& observe) {
  if (candidates.empty()) throw std::invalid_argument("ucb1_init: no candidates");
  std::vector<ArmKey> order(candidates.begin(), candidates.end());
  std::sort(order.begin(), order.end());
  LearnerState state;
  for (const auto& key : order) {
    const double z = observe(key);
    insert_arm(state, {key, z, 1, 0, std::nullopt});
    state.beta = state.subtask_index == 0 ? z : std::max(state.beta, z);
    ++state.subtask_index;
  }
  return state;
}

ArmKey ucb1_select(const LearnerState& state, int k) {
  if (k < 1) throw std::invalid_argument("ucb1_select: k must be >= 1");
  return lower_index_argmin(state, [k](const ArmEstimate&) { return static_cast<double>(k); });
}

void ucb1_update(LearnerState& state, const ArmKey& key, double observed_cost) {
  ArmEstimate* arm = state.find(key);
  if (arm == nullptr)
    throw std::invalid_argument(fmt::format("unknown arm (bs {}, #{})", key.bs_id, key.appearance));
  arm->mean_cost = (arm->pulls * arm->mean_cost + observed_cost) / (arm->pulls + 1);
  ++arm->pulls;
  state.beta = std::max(state.beta, observed_cost);
  ++state.subtask_index;
}

int vucb1_epoch_start(LearnerState& state, std::span<const int> available, int k,
                      const ObserveFn& observe, int max_pulls) {
  if (available.empty()) throw std::invalid_argument("vucb1_epoch_start: empty station set");
  std::vector<int> ids(available.begin(), available.end());
  std::sort(ids.begin(), ids.end());

  for (auto& a : state.arms) {
    if (a.alive() && !std::binary_search(ids.begin(), ids.end(), a.key.bs_id))
      a.death = k - 1;
  }

  const bool first_pull = state.total_pulls() == 0;
  int pulls = 0;
  for (int bs : ids) {
    if (state.live(bs) != nullptr) continue;
    if (pulls >= max_pulls) break;
    int appearance = 0;
    for (const auto& a : state.arms)
      if (a.key.bs_id == bs) appearance = std::max(appearance, a.key.appearance + 1);
    const ArmKey key{bs, appearance};
    const double z = observe(key);
    insert_arm(state, {key, z, 1, k - 1, std::nullopt});
    state.beta = (first_pull && pulls == 0) ? z : std::max(state.beta, z);
    ++state.subtask_index;
    ++pulls;
  }
  return pulls;
}

ArmKey vucb1_select(const LearnerState& state, int k) {
  return lower_index_argmin(state,
                            [k](const ArmEstimate& a) { return static_cast<double>(k - a.birth); });
}

void StopRule::validate() const {
  if (kind == StopKind::fixed_count && k_s < 1) throw std::invalid_argument("stop.ks must be >= 1");
  if (epsilon < 0.0) throw std::invalid_argument("stop.epsilon must be >= 0");
  if (k_0 < 1) throw std::invalid_argument("stop.k0 must be >= 1");
}

StopDecision stop_check(const LearnerState& state, const StopRule& rule, int k) {
  if (rule.kind == StopKind::never) return {};

  const ArmEstimate* best = nullptr;
  const ArmEstimate* second = nullptr;
  for (const auto& a : state.arms) {
    if (!a.alive() || a.pulls < 1) continue;
    if (best == nullptr || a.mean_cost < best->mean_cost) {
      second = best;
      best = &a;
    } else if (second == nullptr || a.mean_cost < second->mean_cost) {
      second = &a;
    }
  }
  if (best == nullptr) return {};

  if (rule.kind == StopKind::fixed_count) {
    if (k >= rule.k_s) return {true, best->key};
    return {};
  }
  // Gap rule. A lone arm leaves nothing to learn.
  if (second == nullptr) return {true, best->key};
  if (second->mean_cost - best->mean_cost <= rule.epsilon && best->pulls >= rule.k_0 &&
      second->pulls >= rule.k_0)
    return {true, best->key};
  return {};
}

RegretLedger regret_decompose(std::span<const RegretStep> trace,
                              std::span<const double> optimal_cost, double v,
                              double handover_cost) {
  if (trace.empty()) throw std::invalid_argument("regret_decompose: empty trace");
  if (trace.size() != optimal_cost.size())
    throw std::invalid_argument("regret_decompose: trace and optimum lengths differ");
  RegretLedger ledger;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    ledger.sampling_regret += trace[k].true_cost - optimal_cost[k];
    if (k > 0 && trace[k].bs_id != trace[k - 1].bs_id) ++ledger.handover_count;
  }
  ledger.handover_regret = v * handover_cost * ledger.handover_count;
  return ledger;
}

double prop1_bound(int k, std::span<const double> deltas, double beta, double v,
                   double handover_cost) {
  if (k < 2) throw std::invalid_argument("prop1_bound: k must be >= 2");
  constexpr double c = 1.0 + std::numbers::pi * std::numbers::pi / 3.0;
  const double log_k = std::log(static_cast<double>(k));
  double sampling = 0.0, switching = 0.0;
  for (double d : deltas) {
    if (!(d > 0.0)) throw std::invalid_argument("prop1_bound: gaps must be positive");
    sampling += 8.0 * log_k / d + c * d;
    switching += 8.0 * log_k / (d * d) + c;
  }
  return beta * sampling + v * handover_cost * (2.0 * switching + 1.0);
}

}  // namespace emm
