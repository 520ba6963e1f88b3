#include "ergopattern/swarm.hpp"

#include <cmath>
#include <numbers>

#include "ergopattern/metrics.hpp"

namespace ergo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unicycle tracking of a desired planar velocity.
Eigen::Vector2d velocity_to_unicycle(const Eigen::Vector2d& velocity, double heading, const ControlConfig& cfg) {
  if (velocity.norm() < 1e-12) return Eigen::Vector2d::Zero();
  const double desired = std::atan2(velocity.y(), velocity.x());
  const double error = std::remainder(desired - heading, kTwoPi);
  const double v = std::clamp(velocity.norm() * std::cos(error), -cfg.u_max, cfg.u_max);
  const double omega = std::clamp(2.0 * error, -cfg.turn_rate_max, cfg.turn_rate_max);
  return {v, omega};
}

Eigen::Vector2d escape_control(const AgentState& agent, const ControlConfig& cfg) {
  if (cfg.dynamics == Dynamics::unicycle) return {cfg.u_max, 0.0};
  return cfg.u_max * Eigen::Vector2d(std::cos(agent.heading), std::sin(agent.heading));
}

// Keeps uncontrolled motion (escapes, separation pushes) from carrying an
// agent deeper past the safe boundary than it already was.
Pose guard_region(const SafeRegion* region, const Point& before, Pose after) {
  if (region == nullptr) return after;
  Point p = region->clamp_inside(after.head<2>());
  if (p.x() != after.x()) after.z() = wrap_angle(std::numbers::pi - after.z());
  if (p.y() != after.y()) after.z() = wrap_angle(-after.z());
  if (region->value(p) < std::min(0.0, region->value(before))) p = before;
  after.head<2>() = p;
  return after;
}

Point clip_to(const Point& x, const Eigen::Vector2d& extents) {
  return x.cwiseMax(Point::Zero()).cwiseMin(extents);
}

std::vector<Point> initial_positions(const WorldConfig& world, const SafeRegion* region, std::mt19937_64& rng) {
  Eigen::Vector2d lo = Eigen::Vector2d::Zero();
  Eigen::Vector2d hi = world.extents;
  if (world.safe_margins) {
    lo = *world.safe_margins;
    hi = world.extents - *world.safe_margins;
  }
  std::uniform_real_distribution<double> ux(lo.x(), hi.x());
  std::uniform_real_distribution<double> uy(lo.y(), hi.y());
  std::vector<Point> positions;
  for (int i = 0; i < world.team_size; ++i) {
    Point candidate;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      candidate = {ux(rng), uy(rng)};
      bool ok = region == nullptr || region->value(candidate) >= 0.0;
      for (const auto& other : positions) {
        ok = ok && (other - candidate).norm() >= world.agent_radius;
      }
      if (ok) break;
    }
    positions.push_back(candidate);
  }
  return positions;
}

} // namespace

void WorldConfig::validate() const {
  if (!(extents.x() > 0.0) || !(extents.y() > 0.0)) throw ConfigError("extents must be positive");
  if (!(agent_radius > 0.0) || !(agent_radius < extents.minCoeff() / 10.0)) {
    throw ConfigError("agent_radius must be positive and below a tenth of the domain extent");
  }
  if (!(dimple_period > 0.0)) throw ConfigError("dimple_period must be positive");
  if (team_size < 1) throw ConfigError("agents must be >= 1");
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw ConfigError("duration must be finite and >= 0");
  if (!(escape_time >= 0.0)) throw ConfigError("escape_time must be >= 0");
  if (dynamics_substeps < 1) throw ConfigError("dynamics_substeps must be >= 1");
  if (metric_cadence < 1) throw ConfigError("metric_cadence must be >= 1");
  if (safe_margins) SafeRegion::inset_rectangle(extents, *safe_margins);
}

std::size_t WorldConfig::steps(double dt) const {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

std::mt19937_64 agent_rng(std::uint64_t trial_seed, int agent_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(trial_seed & 0xffffffffu), static_cast<std::uint32_t>(trial_seed >> 32),
                    static_cast<std::uint32_t>(agent_id + 1), 0xa9e47u};
  return std::mt19937_64(seq);
}

double wrap_angle(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

Pose step_dynamics(const Pose& pose, const Eigen::Vector2d& u, double dt, Dynamics dynamics,
                   const Eigen::Vector2d& extents, int substeps) {
  Pose next = pose;
  if (dynamics == Dynamics::single_integrator) {
    next.head<2>() += u * dt;
    if (u.squaredNorm() > 0.0) next.z() = std::atan2(u.y(), u.x());
  } else {
    const double h = dt / static_cast<double>(std::max(substeps, 1));
    for (int i = 0; i < std::max(substeps, 1); ++i) {
      const double mid = next.z() + 0.5 * u.y() * h;
      next.x() += u.x() * std::cos(mid) * h;
      next.y() += u.x() * std::sin(mid) * h;
      next.z() += u.y() * h;
    }
  }
  if (next.x() < 0.0 || next.x() > extents.x()) {
    next.x() = std::clamp(next.x(), 0.0, extents.x());
    next.z() = std::numbers::pi - next.z();
  }
  if (next.y() < 0.0 || next.y() > extents.y()) {
    next.y() = std::clamp(next.y(), 0.0, extents.y());
    next.z() = -next.z();
  }
  next.z() = wrap_angle(next.z());
  return next;
}

std::vector<std::pair<int, int>> detect_collisions(std::span<const Point> positions, double radius) {
  std::vector<std::pair<int, int>> pairs;
  const int n = static_cast<int>(positions.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((positions[i] - positions[j]).norm() < radius) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

double decorrelate(AgentState& agent, double escape_time) {
  // Open interval (-pi/2, pi/2).
  std::uniform_real_distribution<double> offset_dist(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
  double offset = offset_dist(agent.rng);
  while (offset == -std::numbers::pi / 2.0) offset = offset_dist(agent.rng);
  agent.heading = wrap_angle(agent.heading + std::numbers::pi + offset);
  agent.escape_remaining = escape_time;
  agent.plan.reset();
  return offset;
}

std::vector<DimpleEvent> deposit_dimples(AgentState& agent, double dt, double period, double time,
                                         std::size_t step) {
  std::vector<DimpleEvent> events;
  agent.dimple_phase += dt;
  // Relative slack absorbs accumulated rounding in the phase.
  const double slack = 1e-9 * period;
  while (agent.dimple_phase >= period - slack) {
    agent.dimple_phase -= period;
    events.push_back({agent.position, time, agent.id, step});
  }
  if (std::abs(agent.dimple_phase) < slack) agent.dimple_phase = 0.0;
  return events;
}

TrialRecord run_trial(const WorldConfig& world, const ControlConfig& control, const CommConfig& comm,
                      const SpectralBasis& basis, const CoeffVector& target, std::uint64_t seed) {
  world.validate();
  control.validate();
  comm.validate();
  basis.require_size(target, "target coefficients");
  if (basis.extents() != world.extents) throw ConfigError("basis extents differ from world extents");
  if (control.dynamics != world.dynamics) throw ConfigError("controller and world dynamics differ");

  const double dt = control.dt;
  const std::size_t steps = world.steps(dt);
  const int n = world.team_size;

  std::optional<SafeRegion> region;
  if (world.safe_margins) region = SafeRegion::inset_rectangle(world.extents, *world.safe_margins);
  const SafeRegion* region_ptr = region ? &*region : nullptr;

  std::seed_seq trial_seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                          0x5eedu};
  std::mt19937_64 trial_rng(trial_seq);
  const std::vector<Point> starts = initial_positions(world, region_ptr, trial_rng);
  std::uniform_real_distribution<double> heading_dist(0.0, kTwoPi);

  std::vector<AgentState> agents(n);
  for (int i = 0; i < n; ++i) {
    auto& a = agents[i];
    a.id = i;
    a.position = starts[i];
    a.heading = wrap_angle(heading_dist(trial_rng));
    a.stats = TrajectoryStats(basis.size());
    a.collective = TrajectoryStats(basis.size());
    a.rng = agent_rng(seed, i);
  }

  TrialRecord record;
  record.dt = dt;
  record.team_size = n;
  record.steps = steps;
  record.rows.reserve(steps * n);

  std::vector<Eigen::Vector2d> controls(n);
  std::vector<Point> positions(n);
  std::vector<CoeffVector> samples(n);
  std::vector<TrajectoryStats> own(n);
  std::vector<CoeffVector> own_coeffs(n);

  for (std::size_t s = 0; s < steps; ++s) {
    const double time = static_cast<double>(s + 1) * dt;

    // Plan (or hold the escape heading).
    for (auto& a : agents) {
      if (a.escape_remaining > 1e-9) {
        controls[a.id] = escape_control(a, control);
        continue;
      }
      a.escape_remaining = 0.0;
      const Pose pose(a.position.x(), a.position.y(), a.heading);
      if (control.strategy == Strategy::mpc) {
        const PlanProblem problem{basis, target, a.collective, control, region_ptr, pose};
        std::optional<ControlSequence> warm;
        if (a.plan) warm = shift_plan(*a.plan);
        try {
          PlanResult plan = plan_mpc(problem, warm);
          controls[a.id] = plan.controls.row(0).transpose();
          a.plan = std::move(plan.controls);
        } catch (const ControllerError& e) {
          throw TrialError("agent " + std::to_string(a.id) + ": " + e.what(), s);
        }
      } else {
        const CoeffVector coeffs =
            a.collective.elapsed() > 0.0 ? a.collective.coefficients() : eval_all(basis, a.position);
        Eigen::Vector2d v = spectral_feedback(basis, a.position, coeffs, target, control);
        // The feedback law ignores the barrier; outside the safe set head
        // back in. Without this an agent can settle in a corner, where every
        // basis gradient vanishes.
        if (region_ptr != nullptr && region_ptr->value(a.position) < 0.0) {
          const Eigen::Vector2d g = region_ptr->gradient(a.position);
          if (g.norm() > 1e-12) v = control.u_max * g / g.norm();
        }
        controls[a.id] = control.dynamics == Dynamics::unicycle ? velocity_to_unicycle(v, a.heading, control) : v;
      }
    }

    // Move.
    for (auto& a : agents) {
      const bool escaping = a.escape_remaining > 0.0;
      const Pose before(a.position.x(), a.position.y(), a.heading);
      Pose after = step_dynamics(before, controls[a.id], dt, world.dynamics, world.extents, world.dynamics_substeps);
      if (escaping) {
        if (world.dynamics == Dynamics::single_integrator) after.z() = a.heading;
        after = guard_region(region_ptr, a.position, after);
        a.escape_remaining -= dt;
      }
      a.position = after.head<2>();
      a.heading = after.z();
      a.collided = false;
    }

    // Collisions: separate overlapping pairs, then re-head fresh collisions.
    for (int i = 0; i < n; ++i) positions[i] = agents[i].position;
    const auto pairs = detect_collisions(positions, world.agent_radius);
    std::vector<int> partner(n, -1);
    for (const auto& [i, j] : pairs) {
      auto& a = agents[i];
      auto& b = agents[j];
      Eigen::Vector2d d = b.position - a.position;
      const double dist = d.norm();
      const Eigen::Vector2d dir = dist > 1e-12 ? Eigen::Vector2d(d / dist) : Eigen::Vector2d(1.0, 0.0);
      const double push = 0.5 * (world.agent_radius - dist);
      for (auto* agent : {&a, &b}) {
        const double sign = agent == &a ? -1.0 : 1.0;
        const Point before = agent->position;
        Pose moved(before.x() + sign * push * dir.x(), before.y() + sign * push * dir.y(), agent->heading);
        moved.head<2>() = clip_to(moved.head<2>(), world.extents);
        moved = guard_region(region_ptr, before, moved);
        agent->position = moved.head<2>();
        agent->heading = moved.z();
        agent->collided = true;
      }
      if (partner[i] < 0) partner[i] = j;
      if (partner[j] < 0) partner[j] = i;
    }
    for (auto& a : agents) {
      if (!a.collided || a.escape_remaining > 0.0) continue;
      const double before = a.heading;
      const double offset = decorrelate(a, world.escape_time);
      record.decorrelations.push_back({s, time, a.id, partner[a.id], before, offset});
    }

    // Pattern, accumulate, share.
    std::vector<int> dimple_counts(n, 0);
    for (auto& a : agents) {
      for (auto& e : deposit_dimples(a, dt, world.dimple_period, time, s)) {
        record.dimples.push_back(e);
        ++dimple_counts[a.id];
      }
      samples[a.id] = eval_all(basis, a.position);
      a.stats.add_sample(samples[a.id], dt);
      own[a.id] = a.stats;
    }
    if (comm.exchanges_at(s)) {
      auto shared = ergo::exchange(own, comm);
      for (auto& a : agents) a.collective = std::move(shared[a.id]);
    } else if (comm.mode == CommMode::none) {
      for (auto& a : agents) a.collective = a.stats;
    } else {
      for (auto& a : agents) a.collective.add_sample(samples[a.id], dt);
    }

    // Log.
    const TrajectoryStats pooled = pool(own);
    const double team_metric = ergodic_metric(pooled.coefficients(), target, basis);
    for (int i = 0; i < n; ++i) own_coeffs[i] = own[i].coefficients();
    std::vector<double> pairs_h;
    double team_h = std::numeric_limits<double>::quiet_NaN();
    if (n >= 2) {
      pairs_h = pair_heterogeneity(own_coeffs, basis);
      team_h = 0.0;
      for (double v : pairs_h) team_h += v;
      team_h /= static_cast<double>(pairs_h.size());
    }
    for (const auto& a : agents) {
      record.rows.push_back({time, a.id, a.position, a.heading, controls[a.id], a.collided, dimple_counts[a.id],
                             team_metric, team_h});
    }
    if ((s + 1) % world.metric_cadence == 0 || s + 1 == steps) {
      record.metrics.times.push_back(time);
      record.metrics.ergodic_metric.push_back(team_metric);
      record.metrics.pair_heterogeneity.push_back(pairs_h);
      for (int i = 0; i < n; ++i) record.snapshots.push_back({s, i, own_coeffs[i]});
    }
  }

  record.final_stats.reserve(n);
  for (const auto& a : agents) record.final_stats.push_back(a.stats);
  record.metrics.dimple_performance = dimple_performance_series(record, target, basis, world.metric_cadence);
  return record;
}

} // namespace ergo
