#include "ergopattern/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ergopattern/targets.hpp"

namespace ergo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError(key + ": cannot parse '" + value + "' as " + expected);
}

double to_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size()) bad_value(key, value, "a number");
  return v;
}

long long to_int(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
  return v;
}

int to_int32(const std::string& key, const std::string& value) {
  const long long v = to_int(key, value);
  if (v < -2147483647LL || v > 2147483647LL) bad_value(key, value, "a 32-bit integer");
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  bad_value(key, value, "a boolean");
}

} // namespace

std::string to_string(CommMode mode) { return mode == CommMode::none ? "none" : "full"; }

CommMode parse_comm_mode(const std::string& text) {
  if (text == "none") return CommMode::none;
  if (text == "full") return CommMode::full;
  throw ConfigError("comm: expected none or full, got '" + text + "'");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "target",        "invert",         "target_resolution", "modes_per_axis",  "agents",
      "duration",      "comm",           "exchange_period_steps", "trials",      "seed",
      "out",           "dynamics",       "strategy",          "horizon_steps",   "dt",
      "u_max",         "turn_rate_max",  "descent_iters",     "step_size",       "control_weight",
      "barrier_weight", "safe_margin",   "agent_radius",      "dimple_period",   "escape_time",
      "dynamics_substeps", "metric_cadence", "render_size",   "render",          "kernel_width",
      "threads"};
  return keys;
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "target") {
    c.targets = split_list(value);
    if (c.targets.empty()) bad_value(key, value, "a target list");
  } else if (key == "invert") {
    c.invert = to_bool(key, value);
  } else if (key == "target_resolution") {
    c.target_resolution = to_int32(key, value);
  } else if (key == "modes_per_axis") {
    c.modes_per_axis = to_int32(key, value);
  } else if (key == "agents") {
    c.world.team_size = to_int32(key, value);
  } else if (key == "duration") {
    c.world.duration = to_double(key, value);
  } else if (key == "comm") {
    c.comm_modes.clear();
    if (value == "both") {
      c.comm_modes = {CommMode::none, CommMode::full};
    } else {
      for (const auto& m : split_list(value)) c.comm_modes.push_back(parse_comm_mode(m));
    }
    if (c.comm_modes.empty()) bad_value(key, value, "none, full or both");
  } else if (key == "exchange_period_steps") {
    c.exchange_period_steps = to_int32(key, value);
  } else if (key == "trials") {
    c.trials = to_int32(key, value);
  } else if (key == "seed") {
    const long long v = to_int(key, value);
    if (v < 0) throw ConfigError("seed: must be >= 0");
    c.seed = static_cast<std::uint64_t>(v);
  } else if (key == "out") {
    c.out_dir = value;
  } else if (key == "dynamics") {
    if (value == "single_integrator") {
      c.world.dynamics = c.control.dynamics = Dynamics::single_integrator;
    } else if (value == "unicycle") {
      c.world.dynamics = c.control.dynamics = Dynamics::unicycle;
    } else {
      bad_value(key, value, "single_integrator or unicycle");
    }
  } else if (key == "strategy") {
    if (value == "mpc") {
      c.control.strategy = Strategy::mpc;
    } else if (value == "spectral_feedback") {
      c.control.strategy = Strategy::spectral_feedback;
    } else {
      bad_value(key, value, "mpc or spectral_feedback");
    }
  } else if (key == "horizon_steps") {
    c.control.horizon_steps = to_int32(key, value);
  } else if (key == "dt") {
    c.control.dt = to_double(key, value);
  } else if (key == "u_max") {
    c.control.u_max = to_double(key, value);
  } else if (key == "turn_rate_max") {
    c.control.turn_rate_max = to_double(key, value);
  } else if (key == "descent_iters") {
    c.control.descent_iters = to_int32(key, value);
  } else if (key == "step_size") {
    c.control.step_size = to_double(key, value);
  } else if (key == "control_weight") {
    c.control.control_weight = to_double(key, value);
  } else if (key == "barrier_weight") {
    c.control.barrier_weight = to_double(key, value);
  } else if (key == "safe_margin") {
    if (value == "none") {
      c.world.safe_margins.reset();
    } else {
      const double m = to_double(key, value);
      c.world.safe_margins = Eigen::Vector2d(m, m);
    }
  } else if (key == "agent_radius") {
    c.world.agent_radius = to_double(key, value);
  } else if (key == "dimple_period") {
    c.world.dimple_period = to_double(key, value);
  } else if (key == "escape_time") {
    c.world.escape_time = to_double(key, value);
  } else if (key == "dynamics_substeps") {
    c.world.dynamics_substeps = to_int32(key, value);
  } else if (key == "metric_cadence") {
    const long long v = to_int(key, value);
    if (v < 1) throw ConfigError("metric_cadence: must be >= 1");
    c.world.metric_cadence = static_cast<std::size_t>(v);
  } else if (key == "render_size") {
    c.render_size = to_int32(key, value);
  } else if (key == "render") {
    c.render_images = to_bool(key, value);
  } else if (key == "kernel_width") {
    if (value == "none" || value == "off") {
      c.dimple_kernel_width.reset();
    } else {
      c.dimple_kernel_width = to_double(key, value);
    }
  } else if (key == "threads") {
    const long long v = to_int(key, value);
    if (v < 0) throw ConfigError("threads: must be >= 0");
    c.threads = static_cast<unsigned>(v);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void apply_config_stream(ExperimentConfig& config, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    try {
      apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  ExperimentConfig config;
  apply_config_stream(config, in);
  return config;
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
  };
  require(!c.targets.empty(), "target: at least one target required");
  for (const auto& t : c.targets) {
    require(is_builtin_target(t) || std::filesystem::exists(t),
            "target: '" + t + "' is neither a built-in target nor an existing file");
  }
  require(c.target_resolution >= 1 && c.target_resolution <= 4096, "target_resolution: must be in [1, 4096]");
  require(c.modes_per_axis >= 1 && c.modes_per_axis <= 32, "modes_per_axis: must be in [1, 32]");
  require(c.world.team_size >= 1 && c.world.team_size <= 256, "agents: must be in [1, 256]");
  require(std::isfinite(c.world.duration) && c.world.duration >= 0.0, "duration: must be finite and >= 0");
  require(!c.comm_modes.empty(), "comm: at least one mode required");
  require(c.exchange_period_steps >= 1, "exchange_period_steps: must be >= 1");
  require(c.trials >= 1, "trials: must be >= 1");
  require(c.control.horizon_steps >= 1 && c.control.horizon_steps <= 1000, "horizon_steps: must be in [1, 1000]");
  require(c.control.dt > 0.0 && std::isfinite(c.control.dt), "dt: must be positive");
  require(c.control.u_max > 0.0 && std::isfinite(c.control.u_max), "u_max: must be positive");
  require(c.control.turn_rate_max > 0.0 && std::isfinite(c.control.turn_rate_max), "turn_rate_max: must be positive");
  require(c.control.descent_iters >= 0, "descent_iters: must be >= 0");
  require(c.control.step_size > 0.0 && std::isfinite(c.control.step_size), "step_size: must be positive");
  require(c.control.control_weight >= 0.0 && std::isfinite(c.control.control_weight), "control_weight: must be >= 0");
  require(c.control.barrier_weight >= 0.0 && std::isfinite(c.control.barrier_weight), "barrier_weight: must be >= 0");
  if (c.world.safe_margins) {
    const auto& m = *c.world.safe_margins;
    require((m.array() >= 0.0).all() && (2.0 * m.array() < c.world.extents.array()).all(),
            "safe_margin: must be >= 0 and leave a nonempty safe rectangle");
  }
  require(c.world.agent_radius > 0.0 && c.world.agent_radius < c.world.extents.minCoeff() / 10.0,
          "agent_radius: must be positive and below a tenth of the domain extent");
  require(c.world.dimple_period > 0.0 && std::isfinite(c.world.dimple_period), "dimple_period: must be positive");
  require(c.world.escape_time >= 0.0 && std::isfinite(c.world.escape_time), "escape_time: must be >= 0");
  require(c.world.dynamics_substeps >= 1, "dynamics_substeps: must be >= 1");
  require(c.world.metric_cadence >= 1, "metric_cadence: must be >= 1");
  require(c.render_size >= 1 && c.render_size <= 8192, "render_size: must be in [1, 8192]");
  if (c.dimple_kernel_width) require(*c.dimple_kernel_width > 0.0, "kernel_width: must be positive");
  require(c.world.dynamics == c.control.dynamics, "dynamics: world and controller disagree");
}

} // namespace ergo
