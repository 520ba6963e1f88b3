#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ergopattern/comm.hpp"
#include "ergopattern/controller.hpp"
#include "ergopattern/swarm.hpp"

namespace ergo {

/// Everything a run or batch needs. Keys of the flat config format are the
/// member names listed in `config_keys()`.
struct ExperimentConfig {
  /// Built-in target names or graymap paths.
  std::vector<std::string> targets{"gradient"};
  bool invert = false;
  int target_resolution = 128;
  int modes_per_axis = 10;
  WorldConfig world;
  ControlConfig control;
  /// Batches run every listed mode; single runs use the first.
  std::vector<CommMode> comm_modes{CommMode::none, CommMode::full};
  int exchange_period_steps = 1;
  int trials = 25;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  int render_size = 256;
  bool render_images = true;
  std::optional<double> dimple_kernel_width;
  /// Worker threads for batches; 0 picks the hardware concurrency.
  unsigned threads = 0;

  CommConfig comm(CommMode mode) const { return {mode, exchange_period_steps}; }
};

/// Recognized keys, in documentation order.
const std::vector<std::string>& config_keys();

/// Sets one field from its text form. Throws ConfigError naming the key on
/// unknown keys or unparsable values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Applies `key = value` lines; blank lines and '#' comments are skipped.
/// Throws ParseError (with line number) on malformed lines.
void apply_config_stream(ExperimentConfig& config, std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Range checks on every field; the message names the offending key.
void validate(const ExperimentConfig& config);

std::string to_string(CommMode mode);
CommMode parse_comm_mode(const std::string& text);

} // namespace ergo
