#include "emm/experiment.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "emm/config.hpp"

namespace emm {

SweepVariable parse_sweep_variable(std::string_view name) {
  if (name == "V" || name == "v") return SweepVariable::v;
  if (name == "alpha") return SweepVariable::alpha;
  if (name == "K_s" || name == "ks") return SweepVariable::k_s;
  if (name == "policy") return SweepVariable::policy;
  if (name == "epoch-scenario") return SweepVariable::epoch_scenario;
  throw ConfigError(fmt::format("unknown sweep variable '{}'", name));
}

std::string_view sweep_variable_name(SweepVariable var) {
  switch (var) {
    case SweepVariable::v: return "V";
    case SweepVariable::alpha: return "alpha";
    case SweepVariable::k_s: return "K_s";
    case SweepVariable::policy: return "policy";
    case SweepVariable::epoch_scenario: return "epoch-scenario";
  }
  return "";
}

std::string_view figure_key(SweepVariable var) {
  switch (var) {
    case SweepVariable::policy: return "fig2";
    case SweepVariable::v: return "fig3";
    case SweepVariable::alpha: return "fig4";
    case SweepVariable::k_s: return "fig5";
    case SweepVariable::epoch_scenario: return "fig6";
  }
  return "";
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

namespace {

template <class T>
T parse_number(std::string_view s, std::string_view what) {
  T out{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(fmt::format("{}: cannot parse '{}'", what, s));
  return out;
}

LearningMode scenario_mode(std::string_view policy) {
  const PolicyKind k = parse_policy(policy);
  if (k == PolicyKind::emm_lsi) return LearningMode::restart;
  if (k == PolicyKind::emm_lsi_v) return LearningMode::volatile_arms;
  throw ConfigError(fmt::format("epoch-scenario supports emm-lsi and emm-lsi-v, not '{}'", policy));
}

std::string file_label(std::string_view value) {
  std::string out;
  for (char c : value) {
    const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    c == '.' || c == '-' || c == '+';
    out += ok ? c : '_';
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return os;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> out;
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const auto lo = parse_number<std::uint64_t>(text.substr(0, dots), "seeds");
    const auto hi = parse_number<std::uint64_t>(text.substr(dots + 2), "seeds");
    if (hi < lo) throw ConfigError(fmt::format("empty seed range '{}'", text));
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  for (const auto& item : split_list(text)) out.push_back(parse_number<std::uint64_t>(item, "seeds"));
  if (out.empty()) throw ConfigError("no seeds given");
  return out;
}

RunConfig apply_sweep_value(const RunConfig& base, SweepVariable var, std::string_view value) {
  RunConfig cfg = base;
  switch (var) {
    case SweepVariable::v:
      cfg.control.v = parse_number<double>(value, "V");
      cfg.control.v_schedule.clear();
      break;
    case SweepVariable::alpha:
      cfg.workload.alpha = parse_number<double>(value, "alpha");
      break;
    case SweepVariable::k_s:
      cfg.policy.stop.kind = StopKind::fixed_count;
      cfg.policy.stop.k_s = parse_number<int>(value, "K_s");
      break;
    case SweepVariable::policy:
      cfg.policy.kind = parse_policy(value);
      break;
    case SweepVariable::epoch_scenario:
      throw ConfigError("epoch-scenario points do not map to a run configuration");
  }
  cfg.validate();
  return cfg;
}

void ExperimentSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep values must be nonempty");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  for (const auto& v : values) {
    if (variable == SweepVariable::epoch_scenario) scenario_mode(v);
    else apply_sweep_value(base, variable, v);
  }
}

UtilityScenario three_epoch_scenario() {
  UtilityScenario s;
  s.utility = {{1, 0.5}, {2, 0.8}, {3, 0.4}, {4, 0.9}, {5, 0.7}};
  s.epochs = {{1, 40, {1, 2}}, {41, 80, {1, 2, 3, 4}}, {81, 120, {1, 2, 4, 5}}};
  s.observation.relative_half_width = 0.3;
  return s;
}

namespace {

class UtilityEnvironment final : public ArmEnvironment {
 public:
  UtilityEnvironment(const UtilityScenario& s, Stream& noise) : s_(s), noise_(noise) {}
  double pull(int bs_id) override {
    const auto it = s_.utility.find(bs_id);
    if (it == s_.utility.end()) throw std::out_of_range(fmt::format("no utility for bs {}", bs_id));
    const double w = s_.observation.relative_half_width;
    const double z = std::max(0.0, it->second * (1.0 + noise_.uniform(-w, w)));
    observed.push_back(z);
    return z;
  }
  std::vector<double> observed;

 private:
  const UtilityScenario& s_;
  Stream& noise_;
};

}  // namespace

std::vector<UtilityStep> run_utility_scenario(const UtilityScenario& scenario, LearningMode mode,
                                              std::uint64_t seed) {
  Stream noise(seed, StreamId::noise);
  UtilityEnvironment env(scenario, noise);
  const LearningResult res = run_learning_task(scenario.epochs, env, scenario.stop, mode);
  std::vector<UtilityStep> out;
  out.reserve(res.steps.size());
  for (std::size_t i = 0; i < res.steps.size(); ++i) {
    const auto& st = res.steps[i];
    out.push_back({st.subtask_index, st.epoch_index, st.bs_id, scenario.utility.at(st.bs_id),
                   env.observed[i], i > 0 && res.steps[i - 1].bs_id != st.bs_id});
  }
  return out;
}

UtilityCurves utility_curves(const UtilityScenario& scenario, LearningMode mode,
                             std::span<const std::uint64_t> seeds) {
  std::vector<std::vector<double>> avg, hand;
  for (auto seed : seeds) {
    const auto steps = run_utility_scenario(scenario, mode, seed);
    if (avg.empty()) {
      avg.resize(steps.size());
      hand.resize(steps.size());
    }
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      sum += steps[i].utility;
      count += steps[i].handover ? 1 : 0;
      avg[i].push_back(sum / static_cast<double>(i + 1));
      hand[i].push_back(count);
    }
  }
  UtilityCurves c;
  for (std::size_t i = 0; i < avg.size(); ++i) {
    c.running_utility.push_back(describe(avg[i]));
    c.cumulative_handovers.push_back(describe(hand[i]));
  }
  return c;
}

void write_trace_csv(std::ostream& os, std::span<const TraceRecord> trace) {
  os << "task_id,subtask_index,epoch_index,bs_id,comp_delay,tx_delay,energy,obs_delay,obs_energy,"
        "handover,q_before,v\n";
  for (const auto& r : trace)
    fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{}\n", r.task_id, r.subtask_index,
               r.epoch_index, r.bs_id, num(r.comp_delay), num(r.tx_delay), num(r.energy),
               num(r.obs_delay), num(r.obs_energy), r.handover ? 1 : 0, num(r.q_before), num(r.v));
}

void write_utility_trace_csv(std::ostream& os, std::span<const UtilityStep> steps) {
  os << "subtask_index,epoch_index,bs_id,utility,observed,handover\n";
  for (const auto& s : steps)
    fmt::print(os, "{},{},{},{},{},{}\n", s.subtask_index, s.epoch_index, s.bs_id, num(s.utility),
               num(s.observed), s.handover ? 1 : 0);
}

void write_summary_csv(std::ostream& os, std::span<const std::string> labels,
                       std::span<const ReplicationResult> points) {
  os << "point,row,seed,policy,avg_delay,total_energy,handover_total,deadline_violations,"
        "p_suboptimal\n";
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto& pt = points[p];
    for (const auto& r : pt.runs)
      fmt::print(os, "{},run,{},{},{},{},{},{},{}\n", labels[p], r.seed, policy_name(r.policy),
                 num(r.avg_delay), num(r.total_energy), r.handover_total, r.deadline_violations,
                 r.p_suboptimal ? num(*r.p_suboptimal) : "");
    const auto& a = pt.aggregate;
    const std::string_view policy = pt.runs.empty() ? "" : policy_name(pt.runs.front().policy);
    auto row = [&](std::string_view name, auto field) {
      fmt::print(os, "{},{},,{},{},{},{},{},{}\n", labels[p], name, policy, num(field(a.avg_delay)),
                 num(field(a.total_energy)), num(field(a.handover_total)),
                 num(field(a.deadline_violations)),
                 a.p_suboptimal ? num(field(*a.p_suboptimal)) : "");
    };
    row("mean", [](const Stat& s) { return s.mean; });
    row("std", [](const Stat& s) { return s.stddev; });
    row("min", [](const Stat& s) { return s.min; });
    row("max", [](const Stat& s) { return s.max; });
  }
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(spec.out_dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create '{}': {}", spec.out_dir.string(), ec.message()));

  ExperimentResult result;
  const auto plot_path = spec.out_dir / fmt::format("plotdata_{}.csv", figure_key(spec.variable));

  if (spec.variable == SweepVariable::epoch_scenario) {
    const UtilityScenario scenario = three_epoch_scenario();
    for (const auto& value : spec.values) {
      const LearningMode mode = scenario_mode(value);
      const std::string label = file_label(value);
      for (auto seed : spec.seeds) {
        const auto path = spec.out_dir / fmt::format("trace_{}_{}.csv", label, seed);
        auto os = open_out(path);
        write_utility_trace_csv(os, run_utility_scenario(scenario, mode, seed));
        result.files.push_back(path);
      }
      result.labels.push_back(label);
      result.curves.push_back(utility_curves(scenario, mode, spec.seeds));
    }
    const auto summary_path = spec.out_dir / "summary.csv";
    auto sum = open_out(summary_path);
    sum << "point,subtasks,final_avg_utility_mean,final_avg_utility_std,handovers_mean,handovers_std\n";
    auto plot = open_out(plot_path);
    plot << "policy,subtask_index,avg_utility_mean,avg_utility_std,handovers_mean,handovers_std\n";
    for (std::size_t p = 0; p < result.curves.size(); ++p) {
      const auto& c = result.curves[p];
      for (std::size_t i = 0; i < c.running_utility.size(); ++i)
        fmt::print(plot, "{},{},{},{},{},{}\n", result.labels[p], i + 1,
                   num(c.running_utility[i].mean), num(c.running_utility[i].stddev),
                   num(c.cumulative_handovers[i].mean), num(c.cumulative_handovers[i].stddev));
      if (!c.running_utility.empty())
        fmt::print(sum, "{},{},{},{},{},{}\n", result.labels[p], c.running_utility.size(),
                   num(c.running_utility.back().mean), num(c.running_utility.back().stddev),
                   num(c.cumulative_handovers.back().mean),
                   num(c.cumulative_handovers.back().stddev));
    }
    result.files.push_back(summary_path);
    result.files.push_back(plot_path);
    return result;
  }

  for (const auto& value : spec.values) {
    const RunConfig cfg = apply_sweep_value(spec.base, spec.variable, value);
    const std::string label = file_label(value);
    auto outs = replicate_outputs(cfg, spec.seeds);
    ReplicationResult rep;
    for (auto& o : outs) {
      const auto path = spec.out_dir / fmt::format("trace_{}_{}.csv", label, o.summary.seed);
      auto os = open_out(path);
      write_trace_csv(os, o.trace);
      result.files.push_back(path);
      rep.runs.push_back(std::move(o.summary));
    }
    rep.aggregate = aggregate_runs(rep.runs);
    result.labels.push_back(label);
    result.points.push_back(std::move(rep));
  }

  const auto summary_path = spec.out_dir / "summary.csv";
  {
    auto os = open_out(summary_path);
    write_summary_csv(os, result.labels, result.points);
  }
  {
    auto plot = open_out(plot_path);
    plot << "x,avg_delay_mean,avg_delay_std,total_energy_mean,total_energy_std,handovers_mean,"
            "handovers_std,p_suboptimal_mean,p_suboptimal_std\n";
    for (std::size_t p = 0; p < result.points.size(); ++p) {
      const auto& a = result.points[p].aggregate;
      fmt::print(plot, "{},{},{},{},{},{},{},{},{}\n", spec.values[p], num(a.avg_delay.mean),
                 num(a.avg_delay.stddev), num(a.total_energy.mean), num(a.total_energy.stddev),
                 num(a.handover_total.mean), num(a.handover_total.stddev),
                 a.p_suboptimal ? num(a.p_suboptimal->mean) : "",
                 a.p_suboptimal ? num(a.p_suboptimal->stddev) : "");
    }
  }
  result.files.push_back(summary_path);
  result.files.push_back(plot_path);
  return result;
}

std::string format_bound_report(const BoundReport& report) {
  std::string out = fmt::format("{:<52} {:>14} {:>14} {:>14}  {}\n", "inequality", "measured",
                                "bound", "slack", "verdict");
  for (const auto& c : report.checks)
    out += fmt::format("{:<52} {:>14.6g} {:>14.6g} {:>14.6g}  {}{}\n", c.name, c.measured, c.bound,
                       c.slack(), c.pass ? "PASS" : "FAIL", c.guaranteed ? "" : " (not guaranteed)");
  if (report.learning_dev_empirical)
    out += fmt::format("learning deviation W = {:.6g} (empirical surrogate: max per-task regret)\n",
                       report.learning_dev);
  for (const auto& w : report.warnings) out += fmt::format("warning: {}\n", w);
  return out;
}

}  // namespace emm
