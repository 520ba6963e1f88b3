#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ergopattern/spectral.hpp"

namespace ergo {

/// One indentation left on the workpiece.
struct DimpleEvent {
  Point position = Point::Zero();
  double time = 0.0;
  int agent_id = 0;
  /// World step (0-based) at whose end the dimple was placed.
  std::size_t step = 0;
};

/// A post-collision random re-heading.
struct DecorrelationEvent {
  std::size_t step = 0;
  double time = 0.0;
  int agent_id = 0;
  int partner_id = 0;
  double heading_before = 0.0;
  /// New heading minus (heading_before + pi), in (-pi/2, pi/2).
  double offset = 0.0;
};

/// Per-agent state after one world step.
struct LogRow {
  double time = 0.0;
  int agent_id = 0;
  Point position = Point::Zero();
  double heading = 0.0;
  Eigen::Vector2d control = Eigen::Vector2d::Zero();
  bool collided = false;
  int dimples = 0;
  /// Team ergodic metric of the pooled trajectory statistics.
  double ergodic_metric = 0.0;
  /// Mean pairwise heterogeneity; NaN for single-agent teams.
  double heterogeneity = std::numeric_limits<double>::quiet_NaN();
};

struct CoeffSnapshot {
  std::size_t step = 0;
  int agent_id = 0;
  CoeffVector coeffs;
};

/// Metric values sampled every few world steps.
struct MetricSeries {
  std::vector<double> times;
  std::vector<double> ergodic_metric;
  /// Per-pair heterogeneity, pairs in (0,1), (0,2), ..., (N-2,N-1) order.
  std::vector<std::vector<double>> pair_heterogeneity;
  /// Ergodic metric of the dimples placed so far; NaN before the first dimple.
  std::vector<double> dimple_performance;
};

struct TrialRecord {
  double dt = 0.1;
  int team_size = 0;
  std::size_t steps = 0;
  /// steps x team_size rows, step-major, agents in id order.
  std::vector<LogRow> rows;
  std::vector<DimpleEvent> dimples;
  std::vector<DecorrelationEvent> decorrelations;
  std::vector<TrajectoryStats> final_stats;
  std::vector<CoeffSnapshot> snapshots;
  MetricSeries metrics;

  bool empty() const noexcept { return rows.empty(); }
};

} // namespace ergo
