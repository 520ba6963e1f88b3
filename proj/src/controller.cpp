#include "ergopattern/controller.hpp"

#include <algorithm>
#include <limits>

namespace ergo {

void ControlConfig::validate() const {
  if (horizon_steps < 1) throw ConfigError("horizon_steps must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(u_max > 0.0)) throw ConfigError("u_max must be positive");
  if (!(turn_rate_max > 0.0)) throw ConfigError("turn_rate_max must be positive");
  if (descent_iters < 0) throw ConfigError("descent_iters must be >= 0");
  if (!(step_size > 0.0)) throw ConfigError("step_size must be positive");
  if (!(barrier_weight >= 0.0)) throw ConfigError("barrier_weight must be >= 0");
  if (!(control_weight >= 0.0)) throw ConfigError("control_weight must be >= 0");
}

// ---------------------------------------------------------------------------
// Safe regions

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exact 1D squared distance transform (lower envelope of parabolas) for
// samples spaced `spacing` apart. Infinite entries are not seeds.
void squared_distance_1d(const std::vector<double>& f, double spacing, std::vector<double>& out) {
  const int n = static_cast<int>(f.size());
  out.assign(n, kInf);
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  auto intersect = [&](int q, int p) {
    const double xq = q * spacing, xp = p * spacing;
    return ((f[q] + xq * xq) - (f[p] + xp * xp)) / (2.0 * (xq - xp));
  };
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) return;
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q * spacing) ++k;
    const double d = (q - v[k]) * spacing;
    out[q] = d * d + f[v[k]];
  }
}

// Euclidean distance from every pixel center to the nearest pixel where
// `seed` is true. Pixels are cw wide and ch tall.
Eigen::MatrixXd distance_to(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& seed, double cw, double ch) {
  const Eigen::Index rows = seed.rows();
  const Eigen::Index cols = seed.cols();
  Eigen::MatrixXd d2(rows, cols);
  std::vector<double> f;
  std::vector<double> out;
  for (Eigen::Index c = 0; c < cols; ++c) {
    f.assign(rows, kInf);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (seed(r, c)) f[r] = 0.0;
    }
    squared_distance_1d(f, ch, out);
    for (Eigen::Index r = 0; r < rows; ++r) d2(r, c) = out[r];
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    f.resize(cols);
    for (Eigen::Index c = 0; c < cols; ++c) f[c] = d2(r, c);
    squared_distance_1d(f, cw, out);
    for (Eigen::Index c = 0; c < cols; ++c) d2(r, c) = out[c];
  }
  return d2.cwiseSqrt();
}

} // namespace

SafeRegion SafeRegion::inset_rectangle(const Eigen::Vector2d& extents, const Eigen::Vector2d& margins) {
  if ((margins.array() < 0.0).any() || (2.0 * margins.array() >= extents.array()).any()) {
    throw ConfigError("safe_margin must be nonnegative and leave a nonempty rectangle");
  }
  SafeRegion region;
  region.kind_ = Kind::inset_rectangle;
  region.extents_ = extents;
  region.lower_ = margins;
  region.upper_ = extents - margins;
  return region;
}

SafeRegion SafeRegion::binary_mask(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& mask,
                                   const Eigen::Vector2d& extents) {
  if (mask.size() == 0 || !mask.any()) {
    throw ConfigError("safe mask has no safe pixels");
  }
  SafeRegion region;
  region.kind_ = Kind::binary_mask;
  region.extents_ = extents;
  const double cw = extents.x() / static_cast<double>(mask.cols());
  const double ch = extents.y() / static_cast<double>(mask.rows());

  // Pad with an unsafe frame so the domain walls bound the safe set.
  const Eigen::Index R = mask.rows() + 2;
  const Eigen::Index C = mask.cols() + 2;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> safe =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(R, C, false);
  safe.block(1, 1, mask.rows(), mask.cols()) = mask;
  const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> unsafe = safe.unaryExpr([](bool b) { return !b; });

  const Eigen::MatrixXd to_unsafe = distance_to(unsafe, cw, ch);
  const Eigen::MatrixXd to_safe = distance_to(safe, cw, ch);
  // The boundary sits half a pixel from the nearest opposite-class center.
  const double half = 0.5 * std::min(cw, ch);
  Eigen::MatrixXd signed_distance(R, C);
  for (Eigen::Index r = 0; r < R; ++r) {
    for (Eigen::Index c = 0; c < C; ++c) {
      signed_distance(r, c) = safe(r, c) ? to_unsafe(r, c) - half : -(to_safe(r, c) - half);
    }
  }
  region.distance_ = signed_distance.block(1, 1, mask.rows(), mask.cols());
  return region;
}

Eigen::Vector2d SafeRegion::bilinear_coords(const Point& x) const {
  const double cw = extents_.x() / static_cast<double>(distance_.cols());
  const double ch = extents_.y() / static_cast<double>(distance_.rows());
  return {x.x() / cw - 0.5, (extents_.y() - x.y()) / ch - 0.5};
}

double SafeRegion::value(const Point& x) const {
  if (kind_ == Kind::inset_rectangle) {
    return std::min({x.x() - lower_.x(), upper_.x() - x.x(), x.y() - lower_.y(), upper_.y() - x.y()});
  }
  const Eigen::Index R = distance_.rows();
  const Eigen::Index C = distance_.cols();
  const Eigen::Vector2d uv = bilinear_coords(x);
  const double u = std::clamp(uv.x(), 0.0, static_cast<double>(C - 1));
  const double v = std::clamp(uv.y(), 0.0, static_cast<double>(R - 1));
  const Eigen::Index c0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(u), std::max<Eigen::Index>(C - 2, 0));
  const Eigen::Index r0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(v), std::max<Eigen::Index>(R - 2, 0));
  const Eigen::Index c1 = std::min(c0 + 1, C - 1);
  const Eigen::Index r1 = std::min(r0 + 1, R - 1);
  const double fu = u - static_cast<double>(c0);
  const double fv = v - static_cast<double>(r0);
  const double top = (1 - fu) * distance_(r0, c0) + fu * distance_(r0, c1);
  const double bottom = (1 - fu) * distance_(r1, c0) + fu * distance_(r1, c1);
  return (1 - fv) * top + fv * bottom;
}

Eigen::Vector2d SafeRegion::gradient(const Point& x) const {
  if (kind_ == Kind::inset_rectangle) {
    const double d[4] = {x.x() - lower_.x(), upper_.x() - x.x(), x.y() - lower_.y(), upper_.y() - x.y()};
    const Eigen::Vector2d g[4] = {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
    return g[std::min_element(d, d + 4) - d];
  }
  const Eigen::Index R = distance_.rows();
  const Eigen::Index C = distance_.cols();
  const double cw = extents_.x() / static_cast<double>(C);
  const double ch = extents_.y() / static_cast<double>(R);
  const Eigen::Vector2d uv = bilinear_coords(x);
  const bool u_in = uv.x() >= 0.0 && uv.x() <= static_cast<double>(C - 1);
  const bool v_in = uv.y() >= 0.0 && uv.y() <= static_cast<double>(R - 1);
  const double u = std::clamp(uv.x(), 0.0, static_cast<double>(C - 1));
  const double v = std::clamp(uv.y(), 0.0, static_cast<double>(R - 1));
  const Eigen::Index c0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(u), std::max<Eigen::Index>(C - 2, 0));
  const Eigen::Index r0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(v), std::max<Eigen::Index>(R - 2, 0));
  const Eigen::Index c1 = std::min(c0 + 1, C - 1);
  const Eigen::Index r1 = std::min(r0 + 1, R - 1);
  const double fu = u - static_cast<double>(c0);
  const double fv = v - static_cast<double>(r0);
  const double d_du = (1 - fv) * (distance_(r0, c1) - distance_(r0, c0)) + fv * (distance_(r1, c1) - distance_(r1, c0));
  const double d_dv = (1 - fu) * (distance_(r1, c0) - distance_(r0, c0)) + fu * (distance_(r1, c1) - distance_(r0, c1));
  return {u_in && c1 != c0 ? d_du / cw : 0.0, v_in && r1 != r0 ? -d_dv / ch : 0.0};
}

Point SafeRegion::clamp_inside(const Point& x) const {
  if (kind_ == Kind::inset_rectangle) {
    return x.cwiseMax(lower_).cwiseMin(upper_);
  }
  return x;
}

double barrier_value(const SafeRegion& region, const Point& x) { return region.value(x); }

// ---------------------------------------------------------------------------
// Receding-horizon planner

namespace {

// cos(k w) and its derivative for k = 0..K-1 at every planned state, filled
// by the Chebyshev recurrence so each state costs one sin/cos pair per axis.
struct AxisTable {
  Eigen::MatrixXd cos;   // K x H
  Eigen::MatrixXd dcos;  // K x H, d/dx cos(k pi x / L)

  void fill(const Eigen::VectorXd& coords, int K, double length, bool with_derivative) {
    const Eigen::Index H = coords.size();
    cos.resize(K, H);
    if (with_derivative) dcos.resize(K, H);
    const double scale = std::numbers::pi / length;
    for (Eigen::Index m = 0; m < H; ++m) {
      const double w = scale * coords(m);
      const double c1 = std::cos(w);
      const double s1 = std::sin(w);
      double c_prev = 1.0, s_prev = 0.0;
      double c = c1, s = s1;
      cos(0, m) = 1.0;
      if (with_derivative) dcos(0, m) = 0.0;
      for (int k = 1; k < K; ++k) {
        cos(k, m) = c;
        if (with_derivative) dcos(k, m) = -scale * k * s;
        const double c_next = 2.0 * c1 * c - c_prev;
        const double s_next = 2.0 * c1 * s - s_prev;
        c_prev = c;
        s_prev = s;
        c = c_next;
        s = s_next;
      }
    }
  }
};

struct Evaluation {
  double cost = 0.0;
  Eigen::MatrixX2d state_gradient;  // dJ/d(x, y) at x_1..x_H
};

Evaluation evaluate(const PlanProblem& p, const Eigen::MatrixX3d& states, const ControlSequence& controls,
                    bool with_gradient) {
  const auto& basis = p.basis;
  const int K = basis.modes_per_axis();
  const double dt = p.config.dt;
  const Eigen::Index H = states.rows();

  AxisTable tx, ty;
  tx.fill(states.col(0), K, basis.extents().x(), with_gradient);
  ty.fill(states.col(1), K, basis.extents().y(), with_gradient);

  const double total_time = p.past.elapsed() + static_cast<double>(H) * dt;
  CoeffVector blended(basis.size());
  Eigen::Map<Eigen::MatrixXd> blended_grid(blended.data(), K, K);
  blended_grid.noalias() = tx.cos * ty.cos.transpose();
  blended.array() *= dt / basis.normalizers();
  if (p.past.size() > 0) blended += p.past.sums();
  blended /= total_time;

  const Eigen::ArrayXd residual = blended.array() - p.target.array();
  Evaluation out;
  out.cost = (basis.weights() * residual.square()).sum();
  out.cost += p.config.control_weight * dt * controls.squaredNorm();

  if (with_gradient) {
    // dE/dF_k(x_m) = 2 Lambda_k (c_hat_k - phi_k) dt / T_total; fold 1 / h_k in too.
    CoeffVector weights = (2.0 * dt / total_time) * (basis.weights() * residual / basis.normalizers()).matrix();
    const Eigen::Map<const Eigen::MatrixXd> W(weights.data(), K, K);
    const Eigen::MatrixXd wx = tx.dcos.transpose() * W;  // H x K (over k2)
    const Eigen::MatrixXd wy = tx.cos.transpose() * W;
    out.state_gradient.resize(H, 2);
    out.state_gradient.col(0) = wx.cwiseProduct(ty.cos.transpose()).rowwise().sum();
    out.state_gradient.col(1) = wy.cwiseProduct(ty.dcos.transpose()).rowwise().sum();
  }

  if (p.region != nullptr && p.config.barrier_weight > 0.0) {
    for (Eigen::Index m = 0; m < H; ++m) {
      const Point x = states.row(m).head<2>().transpose();
      const double violation = std::max(0.0, -p.region->value(x));
      if (violation <= 0.0) continue;
      out.cost += p.config.barrier_weight * violation * violation * dt;
      if (with_gradient) {
        out.state_gradient.row(m) -= 2.0 * p.config.barrier_weight * dt * violation * p.region->gradient(x).transpose();
      }
    }
  }
  return out;
}

void require_shape(const ControlSequence& controls, const ControlConfig& config) {
  if (controls.rows() != config.horizon_steps) {
    throw ConfigError("control sequence has " + std::to_string(controls.rows()) + " steps, horizon is " +
                      std::to_string(config.horizon_steps));
  }
}

ControlSequence clamp_controls(const ControlSequence& u, const Eigen::Vector2d& bound) {
  ControlSequence out = u;
  out.col(0) = out.col(0).cwiseMax(-bound.x()).cwiseMin(bound.x());
  out.col(1) = out.col(1).cwiseMax(-bound.y()).cwiseMin(bound.y());
  return out;
}

} // namespace

Eigen::MatrixX3d rollout(const Pose& start, const ControlSequence& controls, const ControlConfig& config) {
  const Eigen::Index H = controls.rows();
  Eigen::MatrixX3d states(H, 3);
  Pose s = start;
  const double dt = config.dt;
  for (Eigen::Index m = 0; m < H; ++m) {
    if (config.dynamics == Dynamics::single_integrator) {
      s.head<2>() += controls.row(m).transpose() * dt;
    } else {
      const double v = controls(m, 0);
      const double omega = controls(m, 1);
      s.x() += v * std::cos(s.z()) * dt;
      s.y() += v * std::sin(s.z()) * dt;
      s.z() += omega * dt;
    }
    states.row(m) = s.transpose();
  }
  return states;
}

double plan_cost(const PlanProblem& problem, const ControlSequence& controls) {
  require_shape(controls, problem.config);
  problem.basis.require_size(problem.target, "target coefficients");
  return evaluate(problem, rollout(problem.start, controls, problem.config), controls, false).cost;
}

ControlSequence plan_cost_gradient(const PlanProblem& problem, const ControlSequence& controls) {
  require_shape(controls, problem.config);
  problem.basis.require_size(problem.target, "target coefficients");
  const auto& cfg = problem.config;
  const double dt = cfg.dt;
  const Eigen::MatrixX3d states = rollout(problem.start, controls, cfg);
  const Evaluation eval = evaluate(problem, states, controls, true);
  const Eigen::Index H = controls.rows();

  ControlSequence grad(H, 2);
  if (cfg.dynamics == Dynamics::single_integrator) {
    // x_m depends on u_j for every j < m with sensitivity dt * I.
    Eigen::RowVector2d tail = Eigen::RowVector2d::Zero();
    for (Eigen::Index m = H - 1; m >= 0; --m) {
      tail += eval.state_gradient.row(m);
      grad.row(m) = dt * tail;
    }
  } else {
    // Adjoint over (x, y, theta); row m of states is s_{m+1}.
    Eigen::Vector3d adjoint = Eigen::Vector3d::Zero();
    for (Eigen::Index m = H - 1; m >= 0; --m) {
      adjoint.head<2>() += eval.state_gradient.row(m).transpose();
      const double theta = m == 0 ? problem.start.z() : states(m - 1, 2);
      const double v = controls(m, 0);
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      grad(m, 0) = dt * (c * adjoint.x() + s * adjoint.y());
      grad(m, 1) = dt * adjoint.z();
      // Propagate through d s_{m+1} / d s_m.
      adjoint.z() += dt * v * (-s * adjoint.x() + c * adjoint.y());
    }
  }
  grad += 2.0 * cfg.control_weight * dt * controls;
  return grad;
}

ControlSequence shift_plan(const ControlSequence& plan) {
  ControlSequence shifted = plan;
  const Eigen::Index H = plan.rows();
  if (H > 1) {
    shifted.topRows(H - 1) = plan.bottomRows(H - 1);
  }
  return shifted;
}

PlanResult plan_mpc(const PlanProblem& problem, const std::optional<ControlSequence>& warm_start) {
  const auto& cfg = problem.config;
  problem.basis.require_size(problem.target, "target coefficients");
  if (problem.past.size() != 0) problem.basis.require_size(problem.past.sums(), "past statistics");
  const Eigen::Vector2d bound = cfg.control_bound();

  PlanResult result;
  if (warm_start) {
    require_shape(*warm_start, cfg);
    result.controls = clamp_controls(*warm_start, bound);
  } else {
    result.controls = ControlSequence::Zero(cfg.horizon_steps, 2);
  }
  double cost = plan_cost(problem, result.controls);
  if (!std::isfinite(cost)) {
    throw ControllerError("non-finite planning cost", 0);
  }
  result.cost_history.push_back(cost);

  double step = cfg.step_size;
  for (int it = 0; it < cfg.descent_iters; ++it) {
    const ControlSequence grad = plan_cost_gradient(problem, result.controls);
    if (!grad.allFinite()) {
      throw ControllerError("non-finite cost gradient", it);
    }
    if (grad.squaredNorm() == 0.0) break;

    bool accepted = false;
    for (int halving = 0; halving <= 20; ++halving) {
      const ControlSequence trial = clamp_controls(result.controls - step * grad, bound);
      const double trial_cost = plan_cost(problem, trial);
      if (trial_cost < cost) {
        result.controls = trial;
        cost = trial_cost;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    result.cost_history.push_back(cost);
    step = std::min(2.0 * step, cfg.step_size);
  }
  return result;
}

Eigen::Vector2d spectral_feedback(const SpectralBasis& basis, const Point& x, const CoeffVector& coeffs,
                                  const CoeffVector& target, const ControlConfig& config) {
  basis.require_size(coeffs, "agent coefficients");
  basis.require_size(target, "target coefficients");
  const Eigen::MatrixX2d grads = eval_all_gradients_unchecked(basis, x);
  const CoeffVector weighted = (basis.weights() * (coeffs - target).array()).matrix();
  const Eigen::Vector2d b = grads.transpose() * weighted;
  const double norm = b.norm();
  if (norm < 1e-12) {
    return Eigen::Vector2d::Zero();
  }
  return -config.u_max * b / norm;
}

} // namespace ergo
