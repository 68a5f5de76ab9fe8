#include "emm/policies.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

#include "emm/lyapunov.hpp"

namespace emm {

namespace {

constexpr std::array<std::pair<PolicyKind, std::string_view>, 7> kPolicyNames{{
    {PolicyKind::emm_gsi, "emm-gsi"},
    {PolicyKind::emm_lsi, "emm-lsi"},
    {PolicyKind::emm_lsi_v, "emm-lsi-v"},
    {PolicyKind::delay_optimal, "delay-optimal"},
    {PolicyKind::energy_optimal, "energy-optimal"},
    {PolicyKind::radio_lsi, "radio-lsi"},
    {PolicyKind::jstep_oracle, "jstep-oracle"},
}};

void require_candidates(std::span<const int> candidates) {
  if (candidates.empty()) throw std::invalid_argument("no candidate stations");
}

// argmin of key(bs) over candidates; candidates are visited in the given
// (ascending) order so ties keep the smallest id.
template <typename KeyFn>
int argmin_station(std::span<const int> candidates, KeyFn key) {
  require_candidates(candidates);
  int best = candidates.front();
  double best_key = key(best);
  for (int bs : candidates.subspan(1)) {
    const double k = key(bs);
    if (k < best_key) {
      best = bs;
      best_key = k;
    }
  }
  return best;
}

EpochSchedule epochs_of(const TaskRealization& task) {
  if (!task.epochs.empty()) return task.epochs;
  return {Epoch{1, task.task.subtask_count, task.candidates}};
}

}  // namespace

std::string_view policy_name(PolicyKind kind) {
  for (const auto& [k, name] : kPolicyNames)
    if (k == kind) return name;
  return "unknown";
}

PolicyKind parse_policy(std::string_view name) {
  for (const auto& [k, n] : kPolicyNames)
    if (n == name) return k;
  throw ConfigError(fmt::format("unknown policy '{}'", name));
}

bool uses_local_state(PolicyKind kind) {
  return kind == PolicyKind::emm_lsi || kind == PolicyKind::emm_lsi_v ||
         kind == PolicyKind::radio_lsi;
}

TaskOutcome evaluate_assignment(const TaskRealization& task, std::span<const int> bs_per_subtask) {
  TaskOutcome out;
  for (std::size_t k = 0; k < bs_per_subtask.size(); ++k) {
    const SubtaskCost& c = task.cost(bs_per_subtask[k]);
    out.total_delay += c.delay();
    out.total_energy += c.energy;
    if (c.delay() > task.task.subtask_deadline) out.deadline_violated = true;
    if (k > 0 && bs_per_subtask[k] != bs_per_subtask[k - 1]) ++out.handover_count;
  }
  out.total_delay += task.task.handover_cost * out.handover_count;
  return out;
}

std::vector<Decision> make_decisions(const TaskRealization& task, std::span<const int> bs_per_subtask,
                                     std::span<const int> epoch_per_subtask) {
  std::vector<Decision> out;
  out.reserve(bs_per_subtask.size());
  for (std::size_t k = 0; k < bs_per_subtask.size(); ++k) {
    Decision d;
    d.task_id = task.task.task_id;
    d.subtask_index = static_cast<int>(k) + 1;
    d.epoch_index = epoch_per_subtask.empty() ? 0 : epoch_per_subtask[k];
    d.bs_id = bs_per_subtask[k];
    d.is_handover = k > 0 && bs_per_subtask[k] != bs_per_subtask[k - 1];
    out.push_back(d);
  }
  return out;
}

GsiChoice emm_gsi_decide(const TaskRealization& task, std::span<const int> candidates, double v,
                         double q) {
  require_candidates(candidates);
  std::vector<int> within;
  for (int bs : candidates)
    if (task.cost(bs).delay() <= task.task.subtask_deadline) within.push_back(bs);
  if (within.empty()) return {delay_optimal_decide(task, candidates), true};
  // Every subtask uses the same station, so the task-level objective
  // V*D + q*E is K times the per-subtask one.
  const int bs = argmin_station(within, [&](int b) {
    const auto& c = task.cost(b);
    return weighted_cost(v, q, c.delay(), c.energy);
  });
  return {bs, false};
}

int delay_optimal_decide(const TaskRealization& task, std::span<const int> candidates) {
  return argmin_station(candidates, [&](int b) { return task.cost(b).delay(); });
}

int energy_optimal_decide(const TaskRealization& task, std::span<const int> candidates) {
  return argmin_station(candidates, [&](int b) { return task.cost(b).energy; });
}

int weighted_optimal(const TaskRealization& task, std::span<const int> candidates, double v,
                     double q) {
  return argmin_station(candidates, [&](int b) {
    const auto& c = task.cost(b);
    return weighted_cost(v, q, c.delay(), c.energy);
  });
}

LearningResult run_learning_task(const EpochSchedule& epochs, ArmEnvironment& env,
                                 const StopRule& stop, LearningMode mode) {
  if (epochs.empty()) throw std::invalid_argument("run_learning_task: no epochs");
  LearningResult res;
  LearnerState state;

  for (std::size_t b = 0; b < epochs.size(); ++b) {
    const Epoch& ep = epochs[b];
    if (ep.available.empty()) throw std::invalid_argument("epoch has no available station");
    const int epoch_index = static_cast<int>(b);
    int k = ep.first_subtask;
    std::optional<ArmKey> stopped;
    auto local = [&](int kk) { return kk - ep.first_subtask + 1; };
    auto observe = [&](const ArmKey& key) {
      const double z = env.pull(key.bs_id);
      res.steps.push_back({k, epoch_index, key.bs_id, true});
      ++k;
      return z;
    };

    std::vector<int> ids = ep.available;
    std::sort(ids.begin(), ids.end());
    if (mode == LearningMode::restart) {
      if (static_cast<int>(ids.size()) > ep.length()) {
        ids.resize(static_cast<std::size_t>(ep.length()));
        res.init_truncated = true;
      }
      std::vector<ArmKey> keys;
      for (int id : ids) keys.push_back({id, 0});
      state = ucb1_init(keys, observe);
    } else {
      int fresh = 0;
      for (int id : ids)
        if (state.live(id) == nullptr) ++fresh;
      if (fresh > ep.length()) res.init_truncated = true;
      vucb1_epoch_start(state, ids, ep.first_subtask, observe, ep.length());
    }

    if (k > ep.first_subtask) {
      const auto s = stop_check(state, stop, local(k - 1));
      if (s.stop) stopped = s.chosen;
    }
    while (k <= ep.last_subtask) {
      ArmKey key;
      if (stopped) {
        key = *stopped;
      } else if (mode == LearningMode::restart) {
        key = ucb1_select(state, local(k));
      } else {
        key = vucb1_select(state, k);
      }
      const double z = env.pull(key.bs_id);
      res.steps.push_back({k, epoch_index, key.bs_id, !stopped.has_value()});
      ucb1_update(state, key, z);
      if (!stopped) {
        const auto s = stop_check(state, stop, local(k));
        if (s.stop) stopped = s.chosen;
      }
      ++k;
    }
    state.stopped_on = stopped;
  }

  if (state.stopped_on) {
    res.post_learning_bs = state.stopped_on->bs_id;
  } else {
    const ArmEstimate* best = nullptr;
    for (const auto& a : state.arms)
      if (a.alive() && a.pulls > 0 && (best == nullptr || a.mean_cost < best->mean_cost)) best = &a;
    res.post_learning_bs = best != nullptr ? best->key.bs_id : res.steps.back().bs_id;
  }
  res.final_state = std::move(state);
  return res;
}

NoisyTaskEnvironment::NoisyTaskEnvironment(const TaskRealization& task,
                                           const ObservationModel& model, Stream& noise, double v,
                                           double q, LearnedCost cost)
    : task_(task), model_(model), noise_(noise), v_(v), q_(q), cost_(cost) {}

double NoisyTaskEnvironment::pull(int bs_id) {
  const SubtaskCost seen = observe(task_.cost(bs_id), model_, noise_);
  observed_.push_back(seen);
  if (cost_ == LearnedCost::energy_only) return seen.energy;
  return weighted_cost(v_, q_, seen.delay(), seen.energy);
}

RegretLedger learning_regret(const TaskRealization& task, std::span<const int> bs_per_subtask,
                             double v, double q) {
  const EpochSchedule epochs = epochs_of(task);
  std::vector<RegretStep> steps;
  std::vector<double> optimum;
  steps.reserve(bs_per_subtask.size());
  optimum.reserve(bs_per_subtask.size());
  std::size_t e = 0;
  double best_z = 0.0;
  int best_for = -1;
  for (std::size_t k = 0; k < bs_per_subtask.size(); ++k) {
    const int subtask = static_cast<int>(k) + 1;
    while (e + 1 < epochs.size() && subtask > epochs[e].last_subtask) ++e;
    if (best_for != static_cast<int>(e)) {
      const int opt = weighted_optimal(task, epochs[e].available, v, q);
      const auto& c = task.cost(opt);
      best_z = weighted_cost(v, q, c.delay(), c.energy);
      best_for = static_cast<int>(e);
    }
    const auto& c = task.cost(bs_per_subtask[k]);
    steps.push_back({bs_per_subtask[k], weighted_cost(v, q, c.delay(), c.energy)});
    optimum.push_back(best_z);
  }
  return regret_decompose(steps, optimum, v, task.task.handover_cost);
}

namespace {

LsiTaskRun run_lsi(const TaskRealization& task, const ObservationModel& model, Stream& noise,
                   double v, double q, const StopRule& stop, LearningMode mode, LearnedCost cost) {
  const EpochSchedule epochs = epochs_of(task);
  validate_schedule(epochs, task.task.subtask_count);
  NoisyTaskEnvironment env(task, model, noise, v, q, cost);
  LearningResult learned = run_learning_task(epochs, env, stop, mode);

  std::vector<int> seq, epoch_idx;
  seq.reserve(learned.steps.size());
  epoch_idx.reserve(learned.steps.size());
  for (const auto& s : learned.steps) {
    seq.push_back(s.bs_id);
    epoch_idx.push_back(s.epoch_index);
  }

  LsiTaskRun run;
  run.decisions = make_decisions(task, seq, epoch_idx);
  run.observed = env.observations();
  run.outcome = evaluate_assignment(task, seq);
  run.regret = learning_regret(task, seq, v, q);
  run.post_learning_bs = learned.post_learning_bs;
  run.optimal_bs = weighted_optimal(task, epochs.back().available, v, q);
  run.init_truncated = learned.init_truncated;
  return run;
}

}  // namespace

LsiTaskRun emm_lsi_run_task(const TaskRealization& task, const ObservationModel& model,
                            Stream& noise, double v, double q, const StopRule& stop) {
  return run_lsi(task, model, noise, v, q, stop, LearningMode::restart, LearnedCost::weighted);
}

LsiTaskRun emm_lsi_v_run_task(const TaskRealization& task, const ObservationModel& model,
                              Stream& noise, double v, double q, const StopRule& stop) {
  return run_lsi(task, model, noise, v, q, stop, LearningMode::volatile_arms,
                 LearnedCost::weighted);
}

LsiTaskRun radio_lsi_run_task(const TaskRealization& task, const ObservationModel& model,
                              Stream& noise, double v, double q, const StopRule& stop) {
  return run_lsi(task, model, noise, v, q, stop, LearningMode::restart, LearnedCost::energy_only);
}

}  // namespace emm
