// emm: run, sweep, verify and dump-config front end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "emm/config.hpp"
#include "emm/experiment.hpp"

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string policy;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Configuration file (key = value lines)");
  cmd->add_option("--seed", c.seed, "Override the seed");
  cmd->add_option("--policy", c.policy, "Override the policy");
}

emm::RunConfig load(const Common& c) {
  emm::RunConfig cfg = c.config_path.empty() ? emm::RunConfig{} : emm::parse_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.policy.empty()) cfg.policy.kind = emm::parse_policy(c.policy);
  cfg.validate();
  return cfg;
}

void print_summary(const emm::RunSummary& s) {
  fmt::print("policy={} seed={} tasks={} avg_delay={:.6g} s total_energy={:.6g} J handovers={} "
             "deadline_violations={}",
             emm::policy_name(s.policy), s.seed, s.task_count, s.avg_delay, s.total_energy,
             s.handover_total, s.deadline_violations);
  if (s.p_suboptimal) fmt::print(" p_suboptimal={:.4f}", *s.p_suboptimal);
  fmt::print("\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware mobility management simulator"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, verify_opts, dump_opts;
  std::string run_out = ".", sweep_out = "out", seeds_text = "1..10", var, values;

  auto* run = app.add_subcommand("run", "Run one configuration and write its trace and summary");
  add_common(run, run_opts);
  run->add_option("--out", run_out, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Sweep one parameter over several seeds");
  add_common(sweep, sweep_opts);
  sweep->add_option("--seeds", seeds_text, "Seed range n..m or comma list");
  sweep->add_option("--out", sweep_out, "Output directory");
  sweep->add_option("--var", var, "V, alpha, K_s, policy or epoch-scenario")->required();
  sweep->add_option("--values", values, "Comma-separated sweep values")->required();

  auto* verify = app.add_subcommand("verify", "Check the delay and energy bounds against the oracle");
  add_common(verify, verify_opts);

  auto* dump = app.add_subcommand("dump-config", "Print the effective configuration");
  add_common(dump, dump_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const emm::RunConfig cfg = load(run_opts);
      const emm::RunOutput out = emm::run_simulation(cfg);
      std::filesystem::create_directories(run_out);
      const std::string label{emm::policy_name(cfg.policy.kind)};
      const auto trace_path =
          std::filesystem::path(run_out) / fmt::format("trace_{}_{}.csv", label, cfg.seed);
      std::ofstream trace(trace_path);
      if (!trace) throw std::runtime_error("cannot write " + trace_path.string());
      emm::write_trace_csv(trace, out.trace);
      emm::ReplicationResult rep{{out.summary}, emm::aggregate_runs(std::span(&out.summary, 1))};
      std::ofstream summary(std::filesystem::path(run_out) / "summary.csv");
      const std::string labels[] = {label};
      emm::write_summary_csv(summary, labels, std::span(&rep, 1));
      print_summary(out.summary);
      return 0;
    }
    if (*sweep) {
      emm::ExperimentSpec spec;
      spec.base = load(sweep_opts);
      spec.variable = emm::parse_sweep_variable(var);
      spec.values = emm::split_list(values);
      spec.seeds = emm::parse_seed_list(seeds_text);
      spec.out_dir = sweep_out;
      const auto res = emm::run_experiment(spec);
      fmt::print("wrote {} files to {}\n", res.files.size(), spec.out_dir.string());
      for (std::size_t p = 0; p < res.points.size(); ++p) {
        const auto& a = res.points[p].aggregate;
        fmt::print("{}={}: avg_delay {:.6g} ± {:.3g} s, total_energy {:.6g} ± {:.3g} J\n",
                   emm::sweep_variable_name(spec.variable), spec.values[p], a.avg_delay.mean,
                   a.avg_delay.stddev, a.total_energy.mean, a.total_energy.stddev);
      }
      return 0;
    }
    if (*verify) {
      emm::RunConfig cfg = load(verify_opts);
      cfg.oracle_corun = true;
      const emm::RunOutput out = emm::run_simulation(cfg);
      print_summary(out.summary);
      const emm::BoundReport& report = *out.summary.bound_report;
      std::cout << emm::format_bound_report(report);
      return report.passed() ? 0 : 1;
    }
    if (*dump) {
      std::cout << emm::dump_config(load(dump_opts));
      return 0;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
