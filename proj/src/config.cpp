#include "emm/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace emm {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Line {
  int number;
  std::string_view key;
};

[[noreturn]] void fail(const Line& l, std::string_view what) {
  throw ConfigError(fmt::format("line {}: {}: {}", l.number, l.key, what));
}

double to_double(const Line& l, std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    fail(l, fmt::format("expected a number, got '{}'", v));
  return out;
}

template <class Int>
Int to_int(const Line& l, std::string_view v) {
  Int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    fail(l, fmt::format("expected an integer, got '{}'", v));
  return out;
}

bool to_bool(const Line& l, std::string_view v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  fail(l, fmt::format("expected true or false, got '{}'", v));
}

using Setter = std::function<void(RunConfig&, const Line&, std::string_view)>;

template <class T>
Setter real(T RunConfig::*group, double T::*field) {
  return [=](RunConfig& c, const Line& l, std::string_view v) { (c.*group).*field = to_double(l, v); };
}

template <class T>
Setter integer(T RunConfig::*group, int T::*field) {
  return [=](RunConfig& c, const Line& l, std::string_view v) { (c.*group).*field = to_int<int>(l, v); };
}

const std::map<std::string_view, Setter>& setters() {
  static const std::map<std::string_view, Setter> table = [] {
    std::map<std::string_view, Setter> t;
    t["seed"] = [](RunConfig& c, const Line& l, std::string_view v) {
      c.seed = to_int<std::uint64_t>(l, v);
    };
    using N = NetworkConfig;
    t["network.area_side"] = real(&RunConfig::network, &N::area_side);
    t["network.bs_count"] = integer(&RunConfig::network, &N::bs_count);
    t["network.coverage_radius"] = real(&RunConfig::network, &N::coverage_radius);
    t["network.bandwidth"] = real(&RunConfig::network, &N::bandwidth);
    t["network.noise_power"] = real(&RunConfig::network, &N::noise_power);
    t["network.tx_power"] = real(&RunConfig::network, &N::tx_power);
    t["network.pathloss_intercept"] = real(&RunConfig::network, &N::pathloss_intercept);
    t["network.pathloss_slope"] = real(&RunConfig::network, &N::pathloss_slope);
    t["network.max_cpu"] = real(&RunConfig::network, &N::max_cpu);
    t["network.min_distance"] = real(&RunConfig::network, &N::min_distance);
    t["network.interference"] = [](RunConfig& c, const Line& l, std::string_view v) {
      if (v == "off") c.network.interference = InterferenceModel::off;
      else if (v == "uniform") c.network.interference = InterferenceModel::uniform;
      else fail(l, fmt::format("expected off or uniform, got '{}'", v));
    };
    t["network.interference_max"] = real(&RunConfig::network, &N::interference_max);
    t["observation.half_width"] =
        real(&RunConfig::observation, &ObservationModel::relative_half_width);
    t["mobility.step"] = [](RunConfig& c, const Line& l, std::string_view v) {
      c.mobility_step = to_double(l, v);
    };
    using W = WorkloadConfig;
    t["workload.tasks"] = integer(&RunConfig::workload, &W::task_count);
    t["workload.subtasks_min"] = integer(&RunConfig::workload, &W::subtasks_min);
    t["workload.subtasks_max"] = integer(&RunConfig::workload, &W::subtasks_max);
    t["workload.subtask_bits"] = real(&RunConfig::workload, &W::subtask_bits);
    t["workload.intensity_min"] = real(&RunConfig::workload, &W::intensity_min);
    t["workload.intensity_max"] = real(&RunConfig::workload, &W::intensity_max);
    t["workload.deadline"] = real(&RunConfig::workload, &W::subtask_deadline);
    t["workload.handover_cost"] = real(&RunConfig::workload, &W::handover_cost);
    t["workload.battery"] = real(&RunConfig::workload, &W::battery);
    t["workload.alpha"] = real(&RunConfig::workload, &W::alpha);
    t["control.frame_length"] = integer(&RunConfig::control, &ControlConfig::frame_length);
    t["control.v"] = real(&RunConfig::control, &ControlConfig::v);
    t["control.v_schedule"] = [](RunConfig& c, const Line& l, std::string_view v) {
      c.control.v_schedule.clear();
      while (!v.empty()) {
        const auto comma = v.find(',');
        c.control.v_schedule.push_back(to_double(l, trim(v.substr(0, comma))));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
      }
    };
    t["policy"] = [](RunConfig& c, const Line& l, std::string_view v) {
      try {
        c.policy.kind = parse_policy(v);
      } catch (const ConfigError& e) {
        fail(l, e.what());
      }
    };
    t["stop.kind"] = [](RunConfig& c, const Line& l, std::string_view v) {
      if (v == "never") c.policy.stop.kind = StopKind::never;
      else if (v == "fixed_count") c.policy.stop.kind = StopKind::fixed_count;
      else if (v == "gap") c.policy.stop.kind = StopKind::gap;
      else fail(l, fmt::format("expected never, fixed_count or gap, got '{}'", v));
    };
    t["stop.ks"] = [](RunConfig& c, const Line& l, std::string_view v) {
      c.policy.stop.k_s = to_int<int>(l, v);
    };
    t["stop.epsilon"] = [](RunConfig& c, const Line& l, std::string_view v) {
      c.policy.stop.epsilon = to_double(l, v);
    };
    t["stop.k0"] = [](RunConfig& c, const Line& l, std::string_view v) {
      c.policy.stop.k_0 = to_int<int>(l, v);
    };
    t["epochs.mode"] = [](RunConfig& c, const Line& l, std::string_view v) {
      if (v == "none") c.epochs.mode = EpochMode::none;
      else if (v == "random") c.epochs.mode = EpochMode::random;
      else fail(l, fmt::format("expected none or random, got '{}'", v));
    };
    t["epochs.per_task"] = integer(&RunConfig::epochs, &EpochModel::epochs_per_task);
    t["epochs.toggle_prob"] = real(&RunConfig::epochs, &EpochModel::toggle_prob);
    t["oracle.deadline"] = [](RunConfig& c, const Line& l, std::string_view v) {
      c.policy.oracle_deadline = to_bool(l, v);
    };
    t["oracle.corun"] = [](RunConfig& c, const Line& l, std::string_view v) {
      c.oracle_corun = to_bool(l, v);
    };
    return t;
  }();
  return table;
}

std::string_view interference_name(InterferenceModel m) {
  return m == InterferenceModel::off ? "off" : "uniform";
}

std::string_view stop_name(StopKind k) {
  switch (k) {
    case StopKind::never: return "never";
    case StopKind::fixed_count: return "fixed_count";
    case StopKind::gap: return "gap";
  }
  return "never";
}

}  // namespace

RunConfig parse_config_text(std::string_view text) {
  RunConfig cfg;
  const auto& table = setters();
  int number = 0;
  while (!text.empty()) {
    ++number;
    const auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("line {}: expected 'key = value'", number));
    const Line line{number, trim(raw.substr(0, eq))};
    const std::string_view value = trim(raw.substr(eq + 1));
    const auto it = table.find(line.key);
    if (it == table.end()) fail(line, "unknown key");
    if (value.empty()) fail(line, "missing value");
    it->second(cfg, line, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string dump_config(const RunConfig& c) {
  std::string out;
  auto put = [&](std::string_view key, const auto& value) {
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(value)>>)
      out += fmt::format("{} = {:.17g}\n", key, value);
    else
      out += fmt::format("{} = {}\n", key, value);
  };
  const auto& n = c.network;
  const auto& w = c.workload;
  put("seed", c.seed);
  put("network.area_side", n.area_side);
  put("network.bs_count", n.bs_count);
  put("network.coverage_radius", n.coverage_radius);
  put("network.bandwidth", n.bandwidth);
  put("network.noise_power", n.noise_power);
  put("network.tx_power", n.tx_power);
  put("network.pathloss_intercept", n.pathloss_intercept);
  put("network.pathloss_slope", n.pathloss_slope);
  put("network.max_cpu", n.max_cpu);
  put("network.min_distance", n.min_distance);
  put("network.interference", interference_name(n.interference));
  put("network.interference_max", n.interference_max);
  put("observation.half_width", c.observation.relative_half_width);
  put("mobility.step", c.mobility_step);
  put("workload.tasks", w.task_count);
  put("workload.subtasks_min", w.subtasks_min);
  put("workload.subtasks_max", w.subtasks_max);
  put("workload.subtask_bits", w.subtask_bits);
  put("workload.intensity_min", w.intensity_min);
  put("workload.intensity_max", w.intensity_max);
  put("workload.deadline", w.subtask_deadline);
  put("workload.handover_cost", w.handover_cost);
  put("workload.battery", w.battery);
  put("workload.alpha", w.alpha);
  put("control.frame_length", c.control.frame_length);
  put("control.v", c.control.v);
  if (!c.control.v_schedule.empty()) {
    std::string list;
    for (double v : c.control.v_schedule)
      list += fmt::format("{}{:.17g}", list.empty() ? "" : ",", v);
    put("control.v_schedule", list);
  }
  put("policy", policy_name(c.policy.kind));
  put("stop.kind", stop_name(c.policy.stop.kind));
  put("stop.ks", c.policy.stop.k_s);
  put("stop.epsilon", c.policy.stop.epsilon);
  put("stop.k0", c.policy.stop.k_0);
  put("epochs.mode", c.epochs.mode == EpochMode::none ? "none" : "random");
  put("epochs.per_task", c.epochs.epochs_per_task);
  put("epochs.toggle_prob", c.epochs.toggle_prob);
  put("oracle.deadline", c.policy.oracle_deadline ? "true" : "false");
  put("oracle.corun", c.oracle_corun ? "true" : "false");
  return out;
}

}  // namespace emm
