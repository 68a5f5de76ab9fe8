// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Pass criterion numbers as arguments
// to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "emm/config.hpp"
#include "emm/experiment.hpp"
#include "oracles.hpp"

using namespace emm;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::uint64_t i = 0; i < n; ++i) s[i] = i + 1;
  return s;
}

// Default scenario shrunk to 100 tasks with the battery scaled alike.
RunConfig scaled_defaults() {
  RunConfig c;
  c.workload.task_count = 100;
  c.workload.battery = 1000.0 * 100 / 500;
  return c;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

Verdict theorem_inequalities() {
  RunConfig c = parse_config_text(
      "network.bs_count = 9\nnetwork.area_side = 450\nworkload.tasks = 20\n"
      "workload.battery = 40\ncontrol.frame_length = 5\ncontrol.v = 0.01\n"
      "policy = emm-gsi\noracle.corun = true\n");
  const auto out = run_simulation(c);
  const auto& rep = *out.summary.bound_report;
  std::string d = fmt::format("alphaB={:.4g} J;", c.total_budget());
  for (const auto& ch : rep.checks)
    d += fmt::format(" {} {:.6g} <= {:.6g};", ch.pass ? "ok" : "VIOLATED", ch.measured, ch.bound);
  if (!rep.excluded_frames.empty()) d += fmt::format(" {} infeasible frames", rep.excluded_frames.size());
  bool ok = rep.checks.size() == 2;
  for (const auto& ch : rep.checks) ok = ok && ch.pass && ch.guaranteed;
  return {ok, d};
}

Verdict oracle_correctness() {
  Stream rng(2024, StreamId::tasks);
  int mismatches = 0, infeasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int j = rng.uniform_int(1, 5);
    std::vector<FrameTask> frame(static_cast<std::size_t>(j));
    double emin = 0, emax = 0;
    for (auto& ft : frame) {
      const int a = rng.uniform_int(1, 4);
      double lo = INFINITY, hi = 0;
      for (int s = 0; s < a; ++s) {
        ft.candidates.push_back(s + 1);
        ft.delay.push_back(rng.uniform(5, 15));
        ft.energy.push_back(rng.uniform(0.1, 2.0));
        ft.meets_deadline.push_back(rng.uniform() < 0.9);
        lo = std::min(lo, ft.energy.back());
        hi = std::max(hi, ft.energy.back());
      }
      emin += lo;
      emax += hi;
    }
    const double budget = rng.uniform(0.9 * emin, 1.1 * emax);
    const auto plan = jstep_lookahead(frame, budget, true);
    const auto brute = oracle::enumerate_frame(frame, budget, true);
    infeasible += !brute.feasible;
    if (plan.feasible != brute.feasible ||
        (brute.feasible && !oracle::rel_close(plan.g_value, brute.g, 1e-12)))
      ++mismatches;
  }
  return {mismatches == 0, fmt::format("{} mismatches in 200 frames ({} infeasible)", mismatches, infeasible)};
}

Verdict tradeoff_sweep() {
  const auto seeds = seed_range(10);
  std::vector<double> vs, delay, energy;
  for (int i = 0; i < 9; ++i) vs.push_back(1e-4 * std::pow(10.0, 5.0 * i / 8.0));
  RunConfig base = scaled_defaults();
  for (double v : vs) {
    RunConfig c = base;
    c.control.v = v;
    const auto rep = replicate(c, seeds);
    delay.push_back(rep.aggregate.avg_delay.mean);
    energy.push_back(rep.aggregate.total_energy.mean);
  }
  const double rd = oracle::spearman(vs, delay), re = oracle::spearman(vs, energy);
  const double budget = base.total_budget();
  const auto [lo, hi] = std::minmax_element(energy.begin(), energy.end());
  const bool crosses = *lo <= budget && *hi >= budget;
  return {rd <= -0.9 && re >= 0.9 && crosses,
          fmt::format("rho(delay,V)={:.3f} rho(energy,V)={:.3f} energy {:.2f}..{:.2f} J vs budget {:.1f} J",
                      rd, re, *lo, *hi, budget)};
}

class NoisyArms final : public ArmEnvironment {
 public:
  NoisyArms(std::map<int, double> mean, double half, std::uint64_t seed)
      : mean_(std::move(mean)), half_(half), rng_(seed, StreamId::noise) {}
  double pull(int bs) override { return mean_.at(bs) * (1.0 + rng_.uniform(-half_, half_)); }

 private:
  std::map<int, double> mean_;
  double half_;
  Stream rng_;
};

Verdict regret_scaling() {
  // Costs 0.5..0.9 with +-10% noise keep observations below 1, so beta <= 1
  // and the normalized gaps are 0.1, 0.2, 0.3, 0.4.
  const std::map<int, double> arms{{1, 0.5}, {2, 0.6}, {3, 0.7}, {4, 0.8}, {5, 0.9}};
  const std::vector<double> deltas{0.1, 0.2, 0.3, 0.4};
  const double v = 1.0, handover = 0.01, beta = 1.0;
  const int horizon = 10000;
  std::vector<int> marks{100, 1000, 10000};
  std::vector<int> doubling;
  for (int k = 125; k <= horizon / 2; k *= 2) doubling.push_back(k);  // 125..4000
  std::set<int> all(marks.begin(), marks.end());
  for (int k : doubling) {
    all.insert(k);
    all.insert(2 * k);
  }
  std::map<int, double> regret;
  const EpochSchedule one{{1, horizon, {1, 2, 3, 4, 5}}};
  const int seeds = 100;
  for (int s = 1; s <= seeds; ++s) {
    NoisyArms env(arms, 0.1, static_cast<std::uint64_t>(s));
    const auto res = run_learning_task(one, env, {StopKind::never, 1, 0, 1}, LearningMode::restart);
    std::vector<RegretStep> trace;
    trace.reserve(res.steps.size());
    for (const auto& st : res.steps) trace.push_back({st.bs_id, arms.at(st.bs_id)});
    for (int k : all) {
      const std::vector<double> opt(static_cast<std::size_t>(k), 0.5);
      regret[k] += regret_decompose(std::span(trace).first(static_cast<std::size_t>(k)), opt, v,
                                    handover).total() / seeds;
    }
  }
  bool ok = true;
  std::string d;
  for (int k : marks) {
    const double b = prop1_bound(k, deltas, beta, v, handover);
    ok = ok && regret[k] <= b;
    d += fmt::format("R({})={:.2f}<={:.1f}; ", k, regret[k], b);
  }
  std::vector<double> inc;
  for (int k : doubling) inc.push_back(regret[2 * k] - regret[k]);
  bool monotone = true;
  for (std::size_t i = 1; i < inc.size(); ++i) monotone = monotone && inc[i] <= inc[i - 1];
  d += "R(2K)-R(K) for K=125..4000:";
  for (double x : inc) d += fmt::format(" {:.2f}", x);
  return {ok && monotone, d};
}

Verdict noiseless_identification() {
  int hits = 0, n = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    RunConfig c = scaled_defaults();
    c.seed = seed;
    c.workload.task_count = 5;
    const auto real = generate_realization(c);
    const auto& task = real.tasks.front();
    const double v = 0.01, q = 1.0;
    const StopRule stop{StopKind::fixed_count, static_cast<int>(task.candidates.size()), 0, 1};
    Stream noise(seed, StreamId::noise);
    const auto run = emm_lsi_run_task(task, ObservationModel{0.0}, noise, v, q, stop);
    hits += run.post_learning_bs == weighted_optimal(task, task.candidates, v, q);
    ++n;
  }
  return {hits == n, fmt::format("{}/{} seeds chose the true optimum", hits, n)};
}

Verdict stop_sweep() {
  const std::vector<int> ks{8, 12, 16, 20, 30, 40, 60, 80};
  const auto seeds = seed_range(10);
  RunConfig base = scaled_defaults();
  base.policy.kind = PolicyKind::emm_lsi;
  base.observation.relative_half_width = 0.3;
  std::vector<Stat> p, delay;
  for (int k : ks) {
    RunConfig c = base;
    c.policy.stop = {StopKind::fixed_count, k, 0, 1};
    const auto rep = replicate(c, seeds);
    p.push_back(*rep.aggregate.p_suboptimal);
    delay.push_back(rep.aggregate.avg_delay);
  }
  int inversions = 0;
  bool within_ci = true;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i].mean <= p[i - 1].mean + 1e-12) continue;  // ties from rounding in the means
    ++inversions;
    const double se = std::sqrt((p[i].stddev * p[i].stddev + p[i - 1].stddev * p[i - 1].stddev) /
                                static_cast<double>(seeds.size()));
    within_ci = within_ci && p[i].mean - p[i - 1].mean <= 1.96 * se;
  }
  const bool trend = inversions <= 1 && within_ci;
  const double d8 = delay[0].mean, d20 = delay[3].mean, d80 = delay.back().mean;
  const bool interior = d20 <= d8 && d20 <= d80;
  std::string d = "p_sub:";
  for (const auto& s : p) d += fmt::format(" {:.4f}", s.mean);
  d += fmt::format(" ({} inversions{}); delay K_s=8/20/80: {:.3f}/{:.3f}/{:.3f}", inversions,
                   within_ci ? "" : ", outside CI", d8, d20, d80);
  if (!trend) d += " [trend FAIL]";
  if (!interior) d += " [interior minimum FAIL]";
  return {trend && interior, d};
}

Verdict volatile_scenario() {
  const auto sc = three_epoch_scenario();
  const auto seeds = seed_range(100);
  const auto restart = utility_curves(sc, LearningMode::restart, seeds);
  const auto vol = utility_curves(sc, LearningMode::volatile_arms, seeds);
  const double r60 = restart.running_utility[59].mean, v60 = vol.running_utility[59].mean;
  const double r110 = restart.running_utility[109].mean, v110 = vol.running_utility[109].mean;
  const double rh = restart.cumulative_handovers[119].mean, vh = vol.cumulative_handovers[119].mean;
  const bool ok = v60 < r60 && v110 < r110 && vh < rh;
  return {ok, fmt::format("utility@60 {:.4f} vs {:.4f}{}; utility@110 {:.4f} vs {:.4f}{}; "
                          "handovers@120 {:.2f} vs {:.2f}{}",
                          v60, r60, v60 < r60 ? "" : " [FAIL]", v110, r110,
                          v110 < r110 ? "" : " [FAIL]", vh, rh, vh < rh ? "" : " [FAIL]")};
}

Verdict policy_ordering() {
  const std::vector<PolicyKind> kinds{PolicyKind::delay_optimal, PolicyKind::jstep_oracle,
                                      PolicyKind::emm_gsi,       PolicyKind::emm_lsi,
                                      PolicyKind::energy_optimal, PolicyKind::radio_lsi};
  std::map<PolicyKind, std::vector<double>> feasible_delay, energy;
  std::vector<double> gsi_bound, lsi_bound;
  int excluded = 0, frames = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RunConfig base = scaled_defaults();
    base.seed = seed;
    const auto real = generate_realization(base);
    const auto plans = plan_frames(base, real);
    frames += static_cast<int>(plans.size());
    for (const auto& p : plans) excluded += !p.feasible;
    for (auto k : kinds) {
      RunConfig c = base;
      c.policy.kind = k;
      const auto out = run_on_realization(c, real);
      double d = 0;
      int n = 0;
      for (const auto& t : out.summary.tasks) {
        if (!plans[static_cast<std::size_t>(t.frame)].feasible) continue;
        d += t.outcome.total_delay;
        ++n;
      }
      feasible_delay[k].push_back(n ? d / n : 0.0);
      energy[k].push_back(out.summary.total_energy);
      if (k == PolicyKind::emm_gsi || k == PolicyKind::emm_lsi) {
        BoundInputs in = bound_inputs(c);
        for (const auto& p : plans) in.g_star.push_back(p.g_value);
        if (k == PolicyKind::emm_lsi)
          for (const auto& t : out.summary.tasks) in.learning_dev = std::max(in.learning_dev, t.regret.total());
        (k == PolicyKind::emm_gsi ? gsi_bound : lsi_bound).push_back(theorem_bounds(in).energy_bound);
      }
    }
  }
  auto md = [&](PolicyKind k) { return mean_of(feasible_delay[k]); };
  auto me = [&](PolicyKind k) { return mean_of(energy[k]); };
  const bool delay_order = md(PolicyKind::delay_optimal) <= md(PolicyKind::jstep_oracle) &&
                           md(PolicyKind::jstep_oracle) <= md(PolicyKind::emm_gsi) &&
                           md(PolicyKind::emm_gsi) <= md(PolicyKind::emm_lsi);
  bool energy_min = true;
  for (auto k : kinds) energy_min = energy_min && me(PolicyKind::energy_optimal) <= me(k);
  const bool bounded = me(PolicyKind::emm_gsi) <= mean_of(gsi_bound) &&
                       me(PolicyKind::emm_lsi) <= mean_of(lsi_bound);
  std::string d = "delay";
  for (auto k : kinds) d += fmt::format(" {}={:.3f}", policy_name(k), md(k));
  d += "; energy";
  for (auto k : kinds) d += fmt::format(" {}={:.1f}", policy_name(k), me(k));
  d += fmt::format("; gsi {:.1f}<={:.1f}, lsi {:.1f}<={:.1f}; {}/{} frames infeasible",
                   me(PolicyKind::emm_gsi), mean_of(gsi_bound), me(PolicyKind::emm_lsi),
                   mean_of(lsi_bound), excluded, frames);
  if (!delay_order) d += " [delay order FAIL]";
  if (!energy_min) d += " [energy minimum FAIL]";
  if (!bounded) d += " [energy bound FAIL]";
  return {delay_order && energy_min && bounded, d};
}

std::string trace_bytes(const RunConfig& c) {
  std::ostringstream os;
  write_trace_csv(os, run_simulation(c).trace);
  return os.str();
}

Verdict determinism() {
  std::vector<RunConfig> configs;
  for (auto k : {PolicyKind::emm_gsi, PolicyKind::emm_lsi, PolicyKind::emm_lsi_v,
                 PolicyKind::radio_lsi, PolicyKind::jstep_oracle}) {
    RunConfig c = scaled_defaults();
    c.workload.task_count = 20;
    c.policy.kind = k;
    c.seed = 11;
    if (k == PolicyKind::emm_lsi_v) c.epochs.mode = EpochMode::random;
    configs.push_back(c);
  }
  int same = 0;
  for (const auto& c : configs) same += trace_bytes(c) == trace_bytes(c);

  // Whole sweeps written to disk twice.
  const auto root = std::filesystem::temp_directory_path() / "emm_acceptance_determinism";
  std::filesystem::remove_all(root);
  ExperimentSpec spec;
  spec.base = configs[1];
  spec.variable = SweepVariable::v;
  spec.values = {"0.001", "0.1"};
  spec.seeds = {1, 2, 3};
  std::vector<std::vector<std::string>> contents(2);
  for (int r = 0; r < 2; ++r) {
    spec.out_dir = root / std::to_string(r);
    for (const auto& f : run_experiment(spec).files) {
      std::ifstream in(f, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      contents[static_cast<std::size_t>(r)].push_back(ss.str());
    }
  }
  std::filesystem::remove_all(root);
  const bool files_same = contents[0] == contents[1];
  return {same == static_cast<int>(configs.size()) && files_same,
          fmt::format("{}/{} in-memory traces identical; {} sweep files {}", same, configs.size(),
                      contents[0].size(), files_same ? "byte-identical" : "DIFFER")};
}

Verdict accounting() {
  Stream rng(31337, StreamId::tasks);
  const std::vector<PolicyKind> kinds{PolicyKind::emm_gsi, PolicyKind::emm_lsi, PolicyKind::emm_lsi_v,
                                      PolicyKind::delay_optimal, PolicyKind::energy_optimal,
                                      PolicyKind::radio_lsi, PolicyKind::jstep_oracle};
  int bad = 0;
  long long rows = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    RunConfig c;
    c.seed = static_cast<std::uint64_t>(trial + 1);
    c.network.bs_count = 16;
    c.network.area_side = 600;
    c.control.frame_length = rng.uniform_int(1, 3);
    c.workload.task_count = c.control.frame_length * rng.uniform_int(1, 3);
    c.workload.subtasks_min = 5;
    c.workload.subtasks_max = 30;
    c.workload.battery = rng.uniform(1, 40);
    c.workload.alpha = rng.uniform(0.1, 1.0);
    c.control.v = std::pow(10.0, rng.uniform(-4, 1));
    c.policy.kind = kinds[static_cast<std::size_t>(rng.uniform_int(0, 6))];
    c.policy.stop = {StopKind::fixed_count, rng.uniform_int(1, 25), 0, 1};
    if (c.policy.kind == PolicyKind::emm_lsi_v) c.epochs.mode = EpochMode::random;
    const auto real = generate_realization(c);
    const auto out = run_on_realization(c, real);
    const double b = c.per_task_budget();
    double q = 0;
    std::size_t r = 0;
    for (const auto& t : out.summary.tasks) {
      const auto& task = real.tasks[static_cast<std::size_t>(t.task_id - 1)];
      if ((t.task_id - 1) % c.control.frame_length == 0) q = 0;
      if (!oracle::rel_close(t.q_before, q) && std::abs(t.q_before - q) > 1e-12) ++bad;
      double delay = 0, energy = 0;
      for (int k = 0; k < t.subtask_count; ++k, ++r) {
        const auto& rec = out.trace[r];
        const auto& st = task.state(rec.bs_id);
        const double rate = c.network.bandwidth *
                            std::log2(1.0 + c.network.tx_power * st.channel_gain /
                                                (c.network.noise_power + st.interference));
        const double comp = task.task.subtask_bits * task.task.intensity / st.cpu_alloc;
        const double tx = task.task.subtask_bits / rate;
        if (!oracle::rel_close(rec.comp_delay, comp) || !oracle::rel_close(rec.tx_delay, tx) ||
            !oracle::rel_close(rec.energy, c.network.tx_power * tx) || rec.q_before != t.q_before)
          ++bad;
        delay += comp + tx + (rec.handover ? task.task.handover_cost : 0.0);
        energy += c.network.tx_power * tx;
        ++rows;
      }
      if (!oracle::rel_close(delay, t.outcome.total_delay) || !oracle::rel_close(energy, t.outcome.total_energy))
        ++bad;
      q = std::max(q + t.outcome.total_energy - b, 0.0);
    }
    if (r != out.trace.size()) ++bad;
  }
  return {bad == 0, fmt::format("1000 traces, {} subtask rows, {} mismatches", rows, bad)};
}

}  // namespace

int main(int argc, char** argv) {
  using Check = Verdict (*)();
  const std::vector<std::pair<std::string, Check>> criteria{
      {"delay and energy guarantees on a 3x3 instance", theorem_inequalities},
      {"lookahead oracle equals exhaustive enumeration", oracle_correctness},
      {"delay/energy tradeoff in V", tradeoff_sweep},
      {"learning regret bound and log scaling", regret_scaling},
      {"noiseless identification", noiseless_identification},
      {"stopping threshold trend", stop_sweep},
      {"volatile learner vs restart on the three-epoch scenario", volatile_scenario},
      {"policy ordering", policy_ordering},
      {"determinism", determinism},
      {"accounting identities", accounting},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, fmt::format("threw: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fmt::print("{} criterion {:>2} {} ({:.1f}s): {}\n", v.pass ? "PASS" : "FAIL", id,
               criteria[i].first, secs, v.detail);
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
