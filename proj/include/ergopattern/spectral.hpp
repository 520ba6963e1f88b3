#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "ergopattern/errors.hpp"

namespace ergo {

using CoeffVector = Eigen::VectorXd;
using Point = Eigen::Vector2d;

/// Multi-index of a cosine mode, k = (k1, k2) with 0 <= k_i < K.
struct Mode {
  int k1 = 0;
  int k2 = 0;
  friend bool operator==(const Mode&, const Mode&) = default;
};

/// Tensor-product cosine basis on the rectangle [0, L1] x [0, L2].
///
/// Modes are stored with k1 running fastest: index(k) = k1 + K * k2. This
/// lets a K x K column-major matrix of per-axis products be viewed as the
/// flat coefficient vector without copying.
class SpectralBasis {
public:
  SpectralBasis(const Eigen::Vector2d& extents, int modes_per_axis);

  const Eigen::Vector2d& extents() const noexcept { return extents_; }
  int modes_per_axis() const noexcept { return modes_per_axis_; }
  Eigen::Index size() const noexcept { return normalizers_.size(); }

  Mode mode(Eigen::Index index) const noexcept {
    return {static_cast<int>(index % modes_per_axis_), static_cast<int>(index / modes_per_axis_)};
  }
  Eigen::Index index(const Mode& k) const noexcept {
    return k.k1 + static_cast<Eigen::Index>(modes_per_axis_) * k.k2;
  }

  /// h_k = sqrt(prod_i (L_i if k_i = 0 else L_i / 2)).
  const Eigen::ArrayXd& normalizers() const noexcept { return normalizers_; }
  /// Lambda_k = (1 + |k|^2)^(-3/2).
  const Eigen::ArrayXd& weights() const noexcept { return weights_; }

  bool contains(const Point& x) const noexcept {
    return x.x() >= 0.0 && x.x() <= extents_.x() && x.y() >= 0.0 && x.y() <= extents_.y();
  }
  void require_contains(const Point& x) const;

  /// Same mode set on the same rectangle.
  bool compatible(const SpectralBasis& other) const noexcept {
    return modes_per_axis_ == other.modes_per_axis_ && extents_ == other.extents_;
  }
  void require_size(const CoeffVector& c, const char* what) const;

private:
  Eigen::Vector2d extents_;
  int modes_per_axis_;
  Eigen::ArrayXd normalizers_;
  Eigen::ArrayXd weights_;
};

/// F_k(x) = (1 / h_k) prod_i cos(k_i pi x_i / L_i). Throws DomainError
/// outside the rectangle.
template <typename Scalar>
Scalar eval_basis(const SpectralBasis& basis, const Mode& k, const Eigen::Matrix<Scalar, 2, 1>& x) {
  basis.require_contains(x.template cast<double>());
  using std::cos;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const auto& L = basis.extents();
  const Scalar h = Scalar(basis.normalizers()(basis.index(k)));
  return cos(Scalar(k.k1) * pi * x.x() / Scalar(L.x())) *
         cos(Scalar(k.k2) * pi * x.y() / Scalar(L.y())) / h;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> eval_basis_gradient(const SpectralBasis& basis, const Mode& k,
                                                const Eigen::Matrix<Scalar, 2, 1>& x) {
  basis.require_contains(x.template cast<double>());
  using std::cos;
  using std::sin;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const auto& L = basis.extents();
  const Scalar h = Scalar(basis.normalizers()(basis.index(k)));
  const Scalar w1 = Scalar(k.k1) * pi / Scalar(L.x());
  const Scalar w2 = Scalar(k.k2) * pi / Scalar(L.y());
  return {-w1 * sin(w1 * x.x()) * cos(w2 * x.y()) / h, -w2 * cos(w1 * x.x()) * sin(w2 * x.y()) / h};
}

/// All |K| basis values at x, in mode order. No domain check: the cosine
/// basis extends smoothly (by reflection) past the walls, which the planner
/// relies on for rolled-out states.
CoeffVector eval_all_unchecked(const SpectralBasis& basis, const Point& x);

/// All |K| basis values at x; throws DomainError outside the rectangle.
CoeffVector eval_all(const SpectralBasis& basis, const Point& x);

/// |K| x 2 matrix whose row k is grad F_k(x). Unchecked, like eval_all_unchecked.
Eigen::MatrixX2d eval_all_gradients_unchecked(const SpectralBasis& basis, const Point& x);

/// Nonnegative piecewise-constant density on an R x C pixel grid.
///
/// Row 0 is the top of the domain (y near L2), column 0 the left edge, so a
/// grid reads in the same orientation as the image it came from.
class DensityMap {
public:
  DensityMap(Eigen::MatrixXd grid, const Eigen::Vector2d& extents);

  /// Scales the grid to unit mass. Throws NormalizationError on zero mass
  /// and Error on negative or non-finite cells.
  static DensityMap normalized(Eigen::MatrixXd grid, const Eigen::Vector2d& extents);

  const Eigen::MatrixXd& grid() const noexcept { return grid_; }
  const Eigen::Vector2d& extents() const noexcept { return extents_; }
  Eigen::Index rows() const noexcept { return grid_.rows(); }
  Eigen::Index cols() const noexcept { return grid_.cols(); }
  double cell_area() const noexcept {
    return extents_.x() * extents_.y() / static_cast<double>(grid_.size());
  }
  double mass() const noexcept { return grid_.sum() * cell_area(); }
  Point cell_center(Eigen::Index row, Eigen::Index col) const noexcept;

private:
  Eigen::MatrixXd grid_;
  Eigen::Vector2d extents_;
};

/// phi_k = integral phi(x) F_k(x) dx by the midpoint rule on the pixel grid.
/// Requires |mass - 1| <= 1e-9 (NormalizationError otherwise).
CoeffVector transform_density(const SpectralBasis& basis, const DensityMap& density);

/// Running time integral of basis values along one trajectory.
///
/// Keeps S_k = sum F_k(x) dt and T = sum dt with Neumaier-compensated
/// summation, so coefficients stay accurate over millions of steps.
class TrajectoryStats {
public:
  TrajectoryStats() = default;
  explicit TrajectoryStats(Eigen::Index size);

  void add_sample(const CoeffVector& basis_values, double dt);
  /// Pools another record: sums and elapsed times add.
  void merge(const TrajectoryStats& other);

  Eigen::Index size() const noexcept { return sums_.size(); }
  double elapsed() const noexcept { return elapsed_ + elapsed_comp_; }
  CoeffVector sums() const { return sums_ + sums_comp_; }
  /// c_k = S_k / T. Requires elapsed() > 0.
  CoeffVector coefficients() const;

private:
  CoeffVector sums_;
  CoeffVector sums_comp_;
  double elapsed_ = 0.0;
  double elapsed_comp_ = 0.0;
};

/// S_k += F_k(x) dt, T += dt. Throws DomainError outside the rectangle and
/// Error for dt <= 0.
void accumulate_trajectory(const SpectralBasis& basis, TrajectoryStats& stats, const Point& x, double dt);

} // namespace ergo
