#include "emm/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "emm/parallel.hpp"

namespace emm {

namespace {

class Fnv1a {
 public:
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xffu;
      h_ *= 0x100000001b3ull;
    }
  }
  void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
  void add(int v) { add(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

bool is_emm(PolicyKind k) {
  return k == PolicyKind::emm_gsi || k == PolicyKind::emm_lsi || k == PolicyKind::emm_lsi_v;
}

EpochSchedule random_epochs(const std::vector<int>& candidates, int subtasks,
                            const EpochModel& model, Stream& rng) {
  const int count = std::clamp(model.epochs_per_task, 1, subtasks);
  EpochSchedule out;
  std::vector<bool> on(candidates.size(), true);
  for (int e = 0; e < count; ++e) {
    Epoch ep;
    ep.first_subtask = e * subtasks / count + 1;
    ep.last_subtask = (e + 1) * subtasks / count;
    if (e > 0) {
      std::vector<bool> next = on;
      for (std::size_t i = 0; i < next.size(); ++i)
        if (rng.bernoulli(model.toggle_prob)) next[i] = !next[i];
      if (std::find(next.begin(), next.end(), true) != next.end()) on = next;
    }
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (on[i]) ep.available.push_back(candidates[i]);
    out.push_back(std::move(ep));
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  check_coverage(network);
  observation.validate();
  policy.stop.validate();
  const auto& w = workload;
  if (w.task_count < 0) throw ConfigError("workload.tasks must be >= 0");
  if (w.subtasks_min < 1 || w.subtasks_max < w.subtasks_min)
    throw ConfigError("workload subtask range must satisfy 1 <= min <= max");
  if (!(w.subtask_bits > 0)) throw ConfigError("workload.subtask_bits must be positive");
  if (!(w.intensity_min >= 0) || w.intensity_max < w.intensity_min)
    throw ConfigError("workload intensity range must satisfy 0 <= min <= max");
  if (!(w.subtask_deadline > 0)) throw ConfigError("workload.deadline must be positive");
  if (!(w.handover_cost >= 0)) throw ConfigError("workload.handover_cost must be >= 0");
  if (!(w.battery > 0)) throw ConfigError("workload.battery must be positive");
  if (!(w.alpha > 0 && w.alpha <= 1)) throw ConfigError("workload.alpha must lie in (0, 1]");
  if (control.frame_length < 1) throw ConfigError("control.frame_length must be >= 1");
  if (w.task_count % control.frame_length != 0)
    throw ConfigError(fmt::format("task count {} is not a multiple of the frame length {}",
                                  w.task_count, control.frame_length));
  if (!(control.v > 0)) throw ConfigError("control.v must be positive");
  const int frames = w.task_count / control.frame_length;
  if (!control.v_schedule.empty()) {
    if (static_cast<int>(control.v_schedule.size()) != frames)
      throw ConfigError(fmt::format("control.v_schedule has {} values for {} frames",
                                    control.v_schedule.size(), frames));
    for (double v : control.v_schedule)
      if (!(v > 0)) throw ConfigError("control.v_schedule values must be positive");
  }
  if (!(mobility_step >= 0)) throw ConfigError("mobility.step must be >= 0");
  if (epochs.mode == EpochMode::random) {
    if (epochs.epochs_per_task < 1) throw ConfigError("epochs.per_task must be >= 1");
    if (!(epochs.toggle_prob >= 0 && epochs.toggle_prob <= 1))
      throw ConfigError("epochs.toggle_prob must lie in [0, 1]");
    if (!uses_local_state(policy.kind))
      throw ConfigError("a varying station set requires a learning policy");
  }
}

ControlSchedule RunConfig::schedule() const {
  const int frames = workload.task_count / control.frame_length;
  ControlSchedule s = ControlSchedule::constant(control.frame_length, frames, control.v);
  if (!control.v_schedule.empty()) s.v_values = control.v_schedule;
  return s;
}

double RunConfig::per_task_budget() const {
  return workload.task_count > 0 ? total_budget() / workload.task_count : 0.0;
}

double RunConfig::energy_max() const {
  return workload.subtasks_max * network.tx_power * workload.subtask_bits /
         worst_case_rate(network);
}

Realization generate_realization(const RunConfig& cfg) {
  Realization real;
  real.network = generate_network(cfg.network);
  Stream mobility(cfg.seed, StreamId::mobility);
  Stream tasks(cfg.seed, StreamId::tasks);
  Stream capability(cfg.seed, StreamId::capability);
  Stream epochs(cfg.seed, StreamId::epochs);

  const double side = cfg.network.area_side;
  Point loc{mobility.uniform(0.0, side), mobility.uniform(0.0, side)};
  Fnv1a fp;
  fp.add(cfg.seed);
  real.tasks.reserve(static_cast<std::size_t>(cfg.workload.task_count));
  for (int m = 1; m <= cfg.workload.task_count; ++m) {
    if (m > 1) loc = step_mobility(loc, cfg.mobility_step, side, mobility);
    TaskRealization tr;
    TaskSpec& t = tr.task;
    t.task_id = m;
    t.location = loc;
    t.subtask_count = tasks.uniform_int(cfg.workload.subtasks_min, cfg.workload.subtasks_max);
    t.intensity = tasks.uniform(cfg.workload.intensity_min, cfg.workload.intensity_max);
    t.subtask_bits = cfg.workload.subtask_bits;
    t.subtask_deadline = cfg.workload.subtask_deadline;
    t.handover_cost = cfg.workload.handover_cost;

    tr.candidates = candidate_set(loc, real.network);
    for (int bs : tr.candidates) {
      const double d = distance(loc, real.network.stations[static_cast<std::size_t>(bs)].position);
      tr.states.push_back(draw_bs_state(bs, d, cfg.network, capability));
      tr.costs.push_back(subtask_cost(t, tr.states.back(), cfg.network));
    }
    if (cfg.epochs.mode == EpochMode::random)
      tr.epochs = random_epochs(tr.candidates, t.subtask_count, cfg.epochs, epochs);

    fp.add(t.subtask_count);
    fp.add(t.intensity);
    fp.add(loc.x);
    fp.add(loc.y);
    for (std::size_t i = 0; i < tr.candidates.size(); ++i) {
      fp.add(tr.candidates[i]);
      fp.add(tr.costs[i].comp_delay);
      fp.add(tr.costs[i].tx_delay);
    }
    for (const auto& ep : tr.epochs) {
      fp.add(ep.first_subtask);
      for (int bs : ep.available) fp.add(bs);
    }
    real.tasks.push_back(std::move(tr));
  }
  fp.add(cfg.workload.subtask_deadline);
  fp.add(cfg.workload.handover_cost);
  real.hash = fp.value();
  return real;
}

namespace {

std::vector<FrameTask> frame_tasks(const RunConfig& cfg, const Realization& real, int frame) {
  const int j = cfg.control.frame_length;
  std::vector<FrameTask> out;
  for (int i = 0; i < j; ++i)
    out.push_back(make_frame_task(real.tasks[static_cast<std::size_t>(frame * j + i)]));
  return out;
}

FramePlan plan_one(const RunConfig& cfg, const Realization& real, int frame, double budget) {
  const auto tasks = frame_tasks(cfg, real, frame);
  return jstep_lookahead(tasks, budget, cfg.policy.oracle_deadline);
}

}  // namespace

std::vector<FramePlan> plan_frames_serial(const RunConfig& cfg, const Realization& real) {
  const int frames = static_cast<int>(real.tasks.size()) / cfg.control.frame_length;
  const double budget = frames > 0 ? cfg.total_budget() / frames : 0.0;
  std::vector<FramePlan> plans;
  plans.reserve(static_cast<std::size_t>(frames));
  for (int r = 0; r < frames; ++r) plans.push_back(plan_one(cfg, real, r, budget));
  return plans;
}

std::vector<FramePlan> plan_frames(const RunConfig& cfg, const Realization& real) {
  const int frames = static_cast<int>(real.tasks.size()) / cfg.control.frame_length;
  const double budget = frames > 0 ? cfg.total_budget() / frames : 0.0;
  std::vector<FramePlan> plans(static_cast<std::size_t>(frames));
  std::vector<std::exception_ptr> errors(plans.size());
  EMM_PARALLEL_FOR
  for (int r = 0; r < frames; ++r) {
    try {
      plans[static_cast<std::size_t>(r)] = plan_one(cfg, real, r, budget);
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return plans;
}

RunOutput run_simulation(const RunConfig& config) {
  config.validate();
  return run_on_realization(config, generate_realization(config));
}

RunOutput run_on_realization(const RunConfig& cfg, const Realization& real) {
  cfg.validate();
  const ControlSchedule schedule = cfg.schedule();
  const PolicyKind kind = cfg.policy.kind;
  const double u_const = constant_u(cfg.energy_max(), cfg.per_task_budget());
  Stream noise(cfg.seed, StreamId::noise);

  RunOutput out;
  RunSummary& s = out.summary;
  s.seed = cfg.seed;
  s.policy = kind;
  s.task_count = cfg.workload.task_count;
  s.realization_hash = real.hash;

  std::vector<FramePlan> plans;
  if (kind == PolicyKind::jstep_oracle || cfg.oracle_corun) plans = plan_frames(cfg, real);

  EnergyDeficitQueue queue{0.0, cfg.per_task_budget()};
  double delay_sum = 0.0;
  int suboptimal = 0;

  for (int m = 1; m <= cfg.workload.task_count; ++m) {
    const FrameControl ctrl = control_for_task(m, schedule);
    if (ctrl.reset) queue.length = 0.0;
    const TaskRealization& task = real.tasks[static_cast<std::size_t>(m - 1)];
    const int subtasks = task.task.subtask_count;

    TaskResult result;
    result.task_id = m;
    result.frame = ctrl.frame;
    result.subtask_count = subtasks;
    result.v = ctrl.v;
    result.q_before = queue.length;

    std::vector<Decision> decisions;
    std::vector<SubtaskCost> observed;
    if (uses_local_state(kind)) {
      LsiTaskRun run;
      if (kind == PolicyKind::emm_lsi)
        run = emm_lsi_run_task(task, cfg.observation, noise, ctrl.v, queue.length, cfg.policy.stop);
      else if (kind == PolicyKind::emm_lsi_v)
        run = emm_lsi_v_run_task(task, cfg.observation, noise, ctrl.v, queue.length, cfg.policy.stop);
      else
        run = radio_lsi_run_task(task, cfg.observation, noise, ctrl.v, queue.length, cfg.policy.stop);
      decisions = std::move(run.decisions);
      observed = std::move(run.observed);
      result.outcome = run.outcome;
      result.regret = run.regret;
      result.post_learning_bs = run.post_learning_bs;
      result.optimal_bs = run.optimal_bs;
      result.init_truncated = run.init_truncated;
      if (run.post_learning_bs != run.optimal_bs) ++suboptimal;
    } else {
      int bs = 0;
      switch (kind) {
        case PolicyKind::emm_gsi:
          bs = emm_gsi_decide(task, task.candidates, ctrl.v, queue.length).bs_id;
          break;
        case PolicyKind::delay_optimal:
          bs = delay_optimal_decide(task, task.candidates);
          break;
        case PolicyKind::energy_optimal:
          bs = energy_optimal_decide(task, task.candidates);
          break;
        case PolicyKind::jstep_oracle:
          bs = plans[static_cast<std::size_t>(ctrl.frame)]
                   .assignments[static_cast<std::size_t>((m - 1) % cfg.control.frame_length)];
          break;
        default:
          throw std::logic_error("unhandled policy");
      }
      const std::vector<int> seq(static_cast<std::size_t>(subtasks), bs);
      decisions = make_decisions(task, seq);
      result.outcome = evaluate_assignment(task, seq);
      result.optimal_bs = weighted_optimal(task, task.candidates, ctrl.v, queue.length);
    }

    for (std::size_t k = 0; k < decisions.size(); ++k) {
      const Decision& d = decisions[k];
      const SubtaskCost& truth = task.cost(d.bs_id);
      const SubtaskCost& seen = observed.empty() ? truth : observed[k];
      out.trace.push_back({m, d.subtask_index, d.epoch_index, d.bs_id, truth.comp_delay,
                           truth.tx_delay, truth.energy, seen.delay(), seen.energy,
                           d.is_handover, queue.length, ctrl.v});
    }

    const double y = result.outcome.total_energy - queue.per_task_budget;
    if (0.5 * y * y > u_const * (1.0 + 1e-9))
      throw std::logic_error(fmt::format("task {}: energy deviation {} J exceeds the U bound", m, y));

    delay_sum += result.outcome.total_delay;
    s.total_energy += result.outcome.total_energy;
    s.handover_total += result.outcome.handover_count;
    if (result.outcome.deadline_violated) ++s.deadline_violations;
    queue = queue_update(queue, result.outcome.total_energy);
    s.tasks.push_back(std::move(result));
  }

  if (cfg.workload.task_count > 0) {
    s.avg_delay = delay_sum / cfg.workload.task_count;
    if (uses_local_state(kind))
      s.p_suboptimal = static_cast<double>(suboptimal) / cfg.workload.task_count;
  }
  if (!plans.empty() || (cfg.oracle_corun && cfg.workload.task_count == 0)) {
    s.oracle = OracleRun{real.hash, std::move(plans)};
    if (cfg.oracle_corun) s.bound_report = verify_bounds(s, *s.oracle, bound_inputs(cfg));
  }
  return out;
}

Stat describe(std::span<const double> values) {
  Stat st;
  st.count = static_cast<int>(values.size());
  if (values.empty()) return st;
  double sum = 0.0;
  st.min = st.max = values.front();
  for (double v : values) {
    sum += v;
    st.min = std::min(st.min, v);
    st.max = std::max(st.max, v);
  }
  st.mean = sum / st.count;
  if (st.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.stddev = std::sqrt(ss / (st.count - 1));
  }
  return st;
}

Aggregate aggregate_runs(std::span<const RunSummary> runs) {
  std::vector<double> delay, energy, handovers, late, subopt;
  for (const auto& r : runs) {
    delay.push_back(r.avg_delay);
    energy.push_back(r.total_energy);
    handovers.push_back(r.handover_total);
    late.push_back(r.deadline_violations);
    if (r.p_suboptimal) subopt.push_back(*r.p_suboptimal);
  }
  Aggregate a;
  a.avg_delay = describe(delay);
  a.total_energy = describe(energy);
  a.handover_total = describe(handovers);
  a.deadline_violations = describe(late);
  if (!subopt.empty()) a.p_suboptimal = describe(subopt);
  return a;
}

namespace {

void check_distinct(std::span<const std::uint64_t> seeds) {
  std::set<std::uint64_t> seen(seeds.begin(), seeds.end());
  if (seen.size() != seeds.size()) throw std::invalid_argument("replicate: seeds must be distinct");
}

RunConfig with_seed(RunConfig cfg, std::uint64_t seed) {
  cfg.seed = seed;
  return cfg;
}

}  // namespace

ReplicationResult replicate_serial(const RunConfig& config, std::span<const std::uint64_t> seeds) {
  check_distinct(seeds);
  ReplicationResult res;
  for (auto seed : seeds) res.runs.push_back(run_simulation(with_seed(config, seed)).summary);
  res.aggregate = aggregate_runs(res.runs);
  return res;
}

std::vector<RunOutput> replicate_outputs(const RunConfig& config,
                                         std::span<const std::uint64_t> seeds) {
  check_distinct(seeds);
  config.validate();
  const int n = static_cast<int>(seeds.size());
  std::vector<RunOutput> outs(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  EMM_PARALLEL_FOR
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      outs[idx] = run_simulation(with_seed(config, seeds[idx]));
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return outs;
}

ReplicationResult replicate(const RunConfig& config, std::span<const std::uint64_t> seeds) {
  auto outs = replicate_outputs(config, seeds);
  ReplicationResult res;
  res.runs.reserve(outs.size());
  for (auto& o : outs) res.runs.push_back(std::move(o.summary));
  res.aggregate = aggregate_runs(res.runs);
  return res;
}

BoundInputs bound_inputs(const RunConfig& cfg) {
  const ControlSchedule sched = cfg.schedule();
  BoundInputs in;
  in.u_const = constant_u(cfg.energy_max(), cfg.per_task_budget());
  in.j = cfg.control.frame_length;
  in.r = sched.frame_count;
  in.v_values = sched.v_values;
  in.total_budget = cfg.total_budget();
  return in;
}

bool BoundReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const BoundCheck& c) { return c.pass || !c.guaranteed; });
}

BoundReport verify_bounds(const RunSummary& summary, const OracleRun& oracle,
                          const BoundInputs& base) {
  if (oracle.realization_hash != summary.realization_hash)
    throw std::invalid_argument(
        "oracle plans were computed on a different realization (seed/config hash mismatch)");
  if (static_cast<int>(oracle.frames.size()) != base.r)
    throw std::invalid_argument(fmt::format("expected {} oracle frames, got {}", base.r,
                                            oracle.frames.size()));

  BoundInputs in = base;
  in.g_star.clear();
  for (const auto& f : oracle.frames) in.g_star.push_back(f.g_value);

  BoundReport rep;
  const bool learning = uses_local_state(summary.policy);
  if (learning) {
    for (const auto& t : summary.tasks) in.learning_dev = std::max(in.learning_dev, t.regret.total());
    rep.learning_dev_empirical = true;
  }
  rep.learning_dev = in.learning_dev;
  const bool guaranteed = is_emm(summary.policy);
  const std::string thm = learning ? "learning" : "exact state";

  for (int r = 0; r < in.r; ++r) {
    if (!oracle.frames[static_cast<std::size_t>(r)].feasible) {
      rep.excluded_frames.push_back(r);
      rep.warnings.push_back(fmt::format("frame {}: oracle infeasible, excluded from the check", r));
    }
  }

  double measured_delay = 0.0, measured_energy = 0.0, delay_bound = 0.0, energy_bound = 0.0;
  if (rep.excluded_frames.empty()) {
    const TheoremBounds tb = theorem_bounds(in);
    measured_delay = summary.avg_delay;
    measured_energy = summary.total_energy;
    delay_bound = tb.delay_bound;
    energy_bound = tb.energy_bound;
  } else {
    // Restrict both sides to the feasible frames using the per-frame bounds.
    int kept = 0;
    double delay_sum = 0.0;
    for (int r = 0; r < in.r; ++r) {
      if (!oracle.frames[static_cast<std::size_t>(r)].feasible) continue;
      ++kept;
      const FrameBound fb = frame_bound(in, r);
      delay_bound += fb.delay_sum_bound;
      energy_bound += fb.energy_bound;
      for (const auto& t : summary.tasks) {
        if (t.frame != r) continue;
        delay_sum += t.outcome.total_delay;
        measured_energy += t.outcome.total_energy;
      }
    }
    if (kept > 0) {
      measured_delay = delay_sum / (kept * in.j);
      delay_bound /= kept * in.j;
    }
  }

  const double tol = 1e-9;
  auto add = [&](std::string name, double measured, double bound) {
    rep.checks.push_back({std::move(name), measured, bound,
                          measured <= bound + tol * std::max(1.0, std::abs(bound)), guaranteed});
  };
  add(fmt::format("average delay <= oracle + O(1/V) ({})", thm), measured_delay, delay_bound);
  add(fmt::format("total energy <= budget + O(V) ({})", thm), measured_energy, energy_bound);
  return rep;
}

}  // namespace emm
