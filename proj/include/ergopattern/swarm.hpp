#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ergopattern/comm.hpp"
#include "ergopattern/controller.hpp"
#include "ergopattern/record.hpp"
#include "ergopattern/spectral.hpp"

namespace ergo {

struct WorldConfig {
  Dynamics dynamics = Dynamics::single_integrator;
  Eigen::Vector2d extents{1.0, 1.0};
  /// Centers closer than this collide (75 mm robots on a 500 mm workpiece).
  double agent_radius = 0.075;
  /// Seconds between dimples.
  double dimple_period = 0.3;
  int team_size = 4;
  double duration = 900.0;
  /// Seconds an agent holds its post-collision heading before control resumes.
  double escape_time = 1.0;
  /// Integration sub-steps per world step (unicycle arcs).
  int dynamics_substeps = 1;
  /// Inset margins of the safe rectangle; nullopt disables the barrier region.
  std::optional<Eigen::Vector2d> safe_margins = Eigen::Vector2d(0.05, 0.05);
  /// Cadence, in world steps, of metric and coefficient snapshots.
  std::size_t metric_cadence = 10;

  void validate() const;
  std::size_t steps(double dt) const;
};

struct AgentState {
  int id = 0;
  Point position = Point::Zero();
  /// Radians in [0, 2 pi).
  double heading = 0.0;
  TrajectoryStats stats;
  /// Statistics the agent plans against (its own, or the last exchange plus
  /// its own samples since).
  TrajectoryStats collective;
  double dimple_phase = 0.0;
  double escape_remaining = 0.0;
  bool collided = false;
  std::mt19937_64 rng;
  std::optional<ControlSequence> plan;
};

/// Disjoint per-agent stream derived from the trial seed.
std::mt19937_64 agent_rng(std::uint64_t trial_seed, int agent_id);

/// Wraps an angle into [0, 2 pi).
double wrap_angle(double theta);

/// Advances a pose one world step. Single integrator: x += u dt, heading
/// follows u. Unicycle: u = (v, omega), integrated over `substeps` sub-steps
/// with the midpoint heading. Positions leaving the rectangle are clipped
/// and the heading reflected off the wall.
Pose step_dynamics(const Pose& pose, const Eigen::Vector2d& u, double dt, Dynamics dynamics,
                   const Eigen::Vector2d& extents, int substeps = 1);

/// Unordered pairs (i < j) whose centers are closer than `radius`.
std::vector<std::pair<int, int>> detect_collisions(std::span<const Point> positions, double radius);

/// Re-heads a collided agent uniformly inside the half plane opposite its
/// current heading, drawing only from the agent's own stream, and starts
/// the escape timer. Returns the sampled offset in (-pi/2, pi/2).
double decorrelate(AgentState& agent, double escape_time);

/// Advances the dimple clock by dt and emits one dimple per elapsed period
/// at the agent's position; the remainder carries over.
std::vector<DimpleEvent> deposit_dimples(AgentState& agent, double dt, double period, double time,
                                         std::size_t step);

/// Simulates one trial: plan, move, resolve collisions, place dimples,
/// accumulate statistics, exchange, log. A pure function of its arguments.
/// Controller failures surface as TrialError carrying the step.
TrialRecord run_trial(const WorldConfig& world, const ControlConfig& control, const CommConfig& comm,
                      const SpectralBasis& basis, const CoeffVector& target, std::uint64_t seed);

} // namespace ergo
