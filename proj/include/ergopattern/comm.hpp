#pragma once

#include <span>
#include <vector>

#include "ergopattern/spectral.hpp"

namespace ergo {

enum class CommMode { none, full };

struct CommConfig {
  CommMode mode = CommMode::none;
  /// Steps between exchanges in full mode; 1 shares every step.
  int exchange_period_steps = 1;

  void validate() const;
  bool exchanges_at(std::size_t step) const noexcept {
    return mode == CommMode::full && (step + 1) % static_cast<std::size_t>(exchange_period_steps) == 0;
  }
};

/// Statistics each agent plans against after a synchronous exchange.
///
/// none: every agent keeps its own record. full: every agent receives the
/// pooled record (sums and elapsed times added), whose coefficients are the
/// time-weighted mean sum_j T_j c_j / sum_j T_j, i.e. (1/N) sum_j c_j for
/// equal elapsed times.
std::vector<TrajectoryStats> exchange(std::span<const TrajectoryStats> stats, const CommConfig& config);
// Exact-match overload so vector arguments don't resolve to std::exchange via ADL.
inline std::vector<TrajectoryStats> exchange(const std::vector<TrajectoryStats>& stats, const CommConfig& config) {
  return exchange(std::span<const TrajectoryStats>(stats), config);
}
inline std::vector<TrajectoryStats> exchange(std::vector<TrajectoryStats>& stats, const CommConfig& config) {
  return exchange(std::span<const TrajectoryStats>(stats), config);
}

/// Pooled record of a whole team.
TrajectoryStats pool(std::span<const TrajectoryStats> stats);

} // namespace ergo
