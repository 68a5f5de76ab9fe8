#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "emm/experiment.hpp"

using namespace emm;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.network.bs_count = 9;
  c.network.area_side = 450;
  c.workload.task_count = 10;
  c.workload.battery = 20;
  return c;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

struct TempDir {
  fs::path path = fs::temp_directory_path() / "emm_experiment_test";
  TempDir() { fs::remove_all(path); }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("seed lists") {
  CHECK(parse_seed_list("1..4") == std::vector<std::uint64_t>{1, 2, 3, 4});
  CHECK(parse_seed_list("7") == std::vector<std::uint64_t>{7});
  CHECK(parse_seed_list("5, 3,9") == std::vector<std::uint64_t>{5, 3, 9});
  CHECK_THROWS_AS(parse_seed_list("4..1"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list(""), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("a"), ConfigError);
  CHECK(split_list(" a, b ,c") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("sweep variables") {
  CHECK(parse_sweep_variable("V") == SweepVariable::v);
  CHECK(parse_sweep_variable("K_s") == SweepVariable::k_s);
  CHECK(parse_sweep_variable("epoch-scenario") == SweepVariable::epoch_scenario);
  CHECK_THROWS_AS(parse_sweep_variable("beta"), ConfigError);
  CHECK(figure_key(SweepVariable::policy) == "fig2");
  CHECK(figure_key(SweepVariable::v) == "fig3");
  CHECK(figure_key(SweepVariable::alpha) == "fig4");
  CHECK(figure_key(SweepVariable::k_s) == "fig5");
  CHECK(figure_key(SweepVariable::epoch_scenario) == "fig6");

  const auto base = small_config();
  CHECK(apply_sweep_value(base, SweepVariable::v, "0.5").control.v == 0.5);
  CHECK(apply_sweep_value(base, SweepVariable::alpha, "0.3").workload.alpha == 0.3);
  const auto ks = apply_sweep_value(base, SweepVariable::k_s, "40");
  CHECK(ks.policy.stop.k_s == 40);
  CHECK(ks.policy.stop.kind == StopKind::fixed_count);
  CHECK(apply_sweep_value(base, SweepVariable::policy, "energy-optimal").policy.kind ==
        PolicyKind::energy_optimal);
  CHECK_THROWS_AS(apply_sweep_value(base, SweepVariable::alpha, "2"), ConfigError);
  CHECK_THROWS_AS(apply_sweep_value(base, SweepVariable::v, "x"), ConfigError);
}

TEST_CASE("sweep writes traces, summary and plot data") {
  TempDir tmp;
  ExperimentSpec spec;
  spec.base = small_config();
  spec.variable = SweepVariable::v;
  spec.values = {"0.001", "0.1"};
  spec.seeds = {1, 2, 3};
  spec.out_dir = tmp.path;
  const auto res = run_experiment(spec);
  CHECK(res.points.size() == 2);
  CHECK(res.files.size() == 2 * 3 + 2);
  for (const auto& f : res.files) CHECK(fs::exists(f));
  CHECK(fs::exists(tmp.path / "trace_0.001_2.csv"));
  CHECK(fs::exists(tmp.path / "plotdata_fig3.csv"));

  const auto summary = lines_of(tmp.path / "summary.csv");
  REQUIRE(summary.size() == 1 + 2 * (3 + 4));
  CHECK(summary[0].rfind("point,row,seed,policy,avg_delay", 0) == 0);
  const auto plot = lines_of(tmp.path / "plotdata_fig3.csv");
  REQUIRE(plot.size() == 3);
  CHECK(plot[1].rfind("0.001,", 0) == 0);

  // Trace rows match the run.
  const auto trace = lines_of(tmp.path / "trace_0.1_1.csv");
  int subtasks = 0;
  for (const auto& t : res.points[1].runs[0].tasks) subtasks += t.subtask_count;
  CHECK(static_cast<int>(trace.size()) == subtasks + 1);
  CHECK(trace[0] ==
        "task_id,subtask_index,epoch_index,bs_id,comp_delay,tx_delay,energy,obs_delay,"
        "obs_energy,handover,q_before,v");
}

TEST_CASE("epoch scenario") {
  TempDir tmp;
  ExperimentSpec spec;
  spec.base = small_config();
  spec.variable = SweepVariable::epoch_scenario;
  spec.values = {"emm-lsi", "emm-lsi-v"};
  spec.seeds = {1, 2};
  spec.out_dir = tmp.path;
  const auto res = run_experiment(spec);
  REQUIRE(res.curves.size() == 2);
  CHECK(res.curves[0].running_utility.size() == 120);
  CHECK(lines_of(tmp.path / "plotdata_fig6.csv").size() == 1 + 2 * 120);
  spec.values = {"emm-gsi"};
  CHECK_THROWS_AS(run_experiment(spec), ConfigError);
}

TEST_CASE("three-epoch scenario") {
  const auto sc = three_epoch_scenario();
  REQUIRE(sc.epochs.size() == 3);
  CHECK(sc.epochs[1].first_subtask == 41);
  CHECK(sc.epochs[2].last_subtask == 120);

  // The volatile learner only initializes newcomers: 2 pulls at the start of epoch 2.
  auto quiet = sc;
  quiet.observation.relative_half_width = 0.0;
  const auto v = run_utility_scenario(quiet, LearningMode::volatile_arms, 1);
  REQUIRE(v.size() == 120);
  CHECK(v[40].bs_id == 3);
  CHECK(v[41].bs_id == 4);
  CHECK(v[42].epoch_index == 1);
  // The restart learner re-initializes all four.
  const auto r = run_utility_scenario(quiet, LearningMode::restart, 1);
  for (int k = 0; k < 4; ++k) CHECK(r[static_cast<std::size_t>(40 + k)].bs_id == k + 1);

  for (const auto& s : v) CHECK(s.utility == sc.utility.at(s.bs_id));
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const auto curves = utility_curves(sc, LearningMode::volatile_arms, seeds);
  CHECK(curves.cumulative_handovers.front().mean == 0);
  for (std::size_t i = 1; i < curves.cumulative_handovers.size(); ++i)
    CHECK(curves.cumulative_handovers[i].mean >= curves.cumulative_handovers[i - 1].mean);
}

TEST_CASE("unwritable output directory") {
  TempDir tmp;
  fs::create_directories(tmp.path);
  { std::ofstream(tmp.path / "file") << "x"; }
  ExperimentSpec spec;
  spec.base = small_config();
  spec.values = {"0.01"};
  spec.out_dir = tmp.path / "file" / "sub";
  CHECK_THROWS_AS(run_experiment(spec), std::runtime_error);
  spec.out_dir = tmp.path;
  spec.values = {};
  CHECK_THROWS_AS(run_experiment(spec), ConfigError);
  spec.values = {"0.01"};
  spec.seeds = {};
  CHECK_THROWS_AS(run_experiment(spec), ConfigError);
}

TEST_CASE("bound report text") {
  BoundReport rep;
  rep.checks.push_back({"total energy", 1.0, 2.0, true, true});
  rep.checks.push_back({"average delay", 3.0, 2.0, false, false});
  rep.warnings.push_back("frame 2: oracle infeasible");
  const auto text = format_bound_report(rep);
  CHECK(text.find("PASS") != std::string::npos);
  CHECK(text.find("FAIL (not guaranteed)") != std::string::npos);
  CHECK(text.find("warning: frame 2") != std::string::npos);
}
