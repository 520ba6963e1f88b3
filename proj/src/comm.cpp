#include "ergopattern/comm.hpp"

namespace ergo {

void CommConfig::validate() const {
  if (exchange_period_steps < 1) {
    throw ConfigError("exchange_period_steps must be >= 1");
  }
}

TrajectoryStats pool(std::span<const TrajectoryStats> stats) {
  if (stats.empty()) {
    throw InsufficientAgentsError("cannot pool an empty team");
  }
  TrajectoryStats pooled(stats.front().size());
  for (const auto& s : stats) {
    if (s.size() != pooled.size()) {
      throw ConfigError("agents use bases of different sizes");
    }
    pooled.merge(s);
  }
  return pooled;
}

std::vector<TrajectoryStats> exchange(std::span<const TrajectoryStats> stats, const CommConfig& config) {
  config.validate();
  if (stats.empty()) {
    return {};
  }
  for (const auto& s : stats) {
    if (s.size() != stats.front().size()) {
      throw ConfigError("agents use bases of different sizes");
    }
    if (!(s.elapsed() > 0.0)) {
      throw Error("exchange requires positive elapsed time for every agent");
    }
  }
  if (config.mode == CommMode::none) {
    return {stats.begin(), stats.end()};
  }
  return std::vector<TrajectoryStats>(stats.size(), pool(stats));
}

} // namespace ergo
