#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ergopattern/spectral.hpp"

namespace ergo {

enum class Strategy { mpc, spectral_feedback };
enum class Dynamics { single_integrator, unicycle };

/// Planar pose: x, y, heading (radians).
using Pose = Eigen::Vector3d;
/// H x 2 control sequence. Single integrator: (vx, vy). Unicycle: (v, omega).
using ControlSequence = Eigen::MatrixX2d;

struct ControlConfig {
  int horizon_steps = 20;
  double dt = 0.1;
  /// Per-axis bound on (vx, vy), or on forward speed for the unicycle.
  double u_max = 0.08;
  /// Unicycle turn-rate bound (rad/s).
  double turn_rate_max = 1.0;
  int descent_iters = 30;
  /// Initial descent step; backtracking halves it until the cost drops.
  double step_size = 50.0;
  double barrier_weight = 1e3;
  double control_weight = 0.05;
  Strategy strategy = Strategy::mpc;
  Dynamics dynamics = Dynamics::single_integrator;

  void validate() const;
  Eigen::Vector2d control_bound() const {
    return dynamics == Dynamics::unicycle ? Eigen::Vector2d(u_max, turn_rate_max) : Eigen::Vector2d(u_max, u_max);
  }
};

/// Safe subset of the workspace described by a barrier h(x): positive inside,
/// zero on the boundary, negative outside.
class SafeRegion {
public:
  enum class Kind { inset_rectangle, binary_mask };

  /// Rectangle [m, L1 - m] x [m, L2 - m] for margins m = (m1, m2).
  static SafeRegion inset_rectangle(const Eigen::Vector2d& extents, const Eigen::Vector2d& margins);

  /// mask(r, c) true marks a safe pixel; row 0 is the top of the domain.
  /// The barrier is the bilinearly interpolated signed Euclidean distance
  /// to the safe/unsafe pixel boundary.
  static SafeRegion binary_mask(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& mask,
                                const Eigen::Vector2d& extents);

  Kind kind() const noexcept { return kind_; }
  const Eigen::Vector2d& extents() const noexcept { return extents_; }

  double value(const Point& x) const;
  Eigen::Vector2d gradient(const Point& x) const;

  /// Pulls x onto the safe set (rectangle: clamp; mask: unchanged when the
  /// barrier is negative, callers keep the previous point instead).
  Point clamp_inside(const Point& x) const;

private:
  SafeRegion() = default;

  // Signed distance sampled at pixel centers, row 0 at the top.
  Eigen::Vector2d bilinear_coords(const Point& x) const;

  Kind kind_ = Kind::inset_rectangle;
  Eigen::Vector2d extents_{1.0, 1.0};
  Eigen::Vector2d lower_{0.0, 0.0};
  Eigen::Vector2d upper_{1.0, 1.0};
  Eigen::MatrixXd distance_;
};

/// min over the four inset edges for rectangles, interpolated signed distance for masks.
double barrier_value(const SafeRegion& region, const Point& x);

/// Everything one receding-horizon replan needs. `past` is the statistics
/// the agent plans against: its own record without communication, the
/// pooled team record with it. Planned samples enter the blend as
///   c_hat = (S_past + sum_m F(x_m) dt) / (T_past + H dt),
/// which equals (T c_past + sum F dt / N) / (T + H dt / N) for a team of N
/// pooling equal elapsed times T.
struct PlanProblem {
  const SpectralBasis& basis;
  const CoeffVector& target;
  const TrajectoryStats& past;
  const ControlConfig& config;
  const SafeRegion* region = nullptr;
  Pose start = Pose::Zero();
};

/// Rolled-out poses x_1..x_H (H x 3) under the configured dynamics.
Eigen::MatrixX3d rollout(const Pose& start, const ControlSequence& controls, const ControlConfig& config);

/// J = sum_k Lambda_k (c_hat_k - phi_k)^2 + w_u sum ||u_m||^2 dt + w_b sum max(0, -h(x_m))^2 dt.
double plan_cost(const PlanProblem& problem, const ControlSequence& controls);

/// dJ/du by reverse-mode chain rule through the rollout.
ControlSequence plan_cost_gradient(const PlanProblem& problem, const ControlSequence& controls);

struct PlanResult {
  ControlSequence controls;
  /// J before descent followed by J after every accepted iteration.
  std::vector<double> cost_history;
};

/// Projected gradient descent on J with backtracking, starting from
/// `warm_start` (typically the previous plan shifted one step) or zeros.
PlanResult plan_mpc(const PlanProblem& problem, const std::optional<ControlSequence>& warm_start = std::nullopt);

/// Previous plan advanced one step, last control repeated.
ControlSequence shift_plan(const ControlSequence& plan);

/// u = -u_max B / ||B||, B = sum_k Lambda_k (c_k - phi_k) grad F_k(x).
/// `coeffs` are the agent's current (own or collective) statistics.
Eigen::Vector2d spectral_feedback(const SpectralBasis& basis, const Point& x, const CoeffVector& coeffs,
                                  const CoeffVector& target, const ControlConfig& config);

} // namespace ergo
