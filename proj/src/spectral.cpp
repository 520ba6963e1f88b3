#include "ergopattern/spectral.hpp"

#include <sstream>

namespace ergo {

namespace {

// Row k of the result is cos(k pi x / L) for k = 0..K-1.
Eigen::ArrayXd axis_cosines(int modes, double x, double length) {
  const double w = std::numbers::pi * x / length;
  return (Eigen::ArrayXd::LinSpaced(modes, 0.0, modes - 1.0) * w).cos();
}

Eigen::ArrayXd axis_sines(int modes, double x, double length) {
  const double w = std::numbers::pi * x / length;
  return (Eigen::ArrayXd::LinSpaced(modes, 0.0, modes - 1.0) * w).sin();
}

void neumaier_add(double& sum, double& comp, double value) {
  const double t = sum + value;
  if (std::abs(sum) >= std::abs(value)) {
    comp += (sum - t) + value;
  } else {
    comp += (value - t) + sum;
  }
  sum = t;
}

} // namespace

SpectralBasis::SpectralBasis(const Eigen::Vector2d& extents, int modes_per_axis)
    : extents_(extents), modes_per_axis_(modes_per_axis) {
  if (!(extents.x() > 0.0) || !(extents.y() > 0.0) || !extents.allFinite()) {
    throw ConfigError("basis extents must be positive");
  }
  if (modes_per_axis < 1 || modes_per_axis > 32) {
    throw ConfigError("modes per axis must be in [1, 32], got " + std::to_string(modes_per_axis));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(modes_per_axis) * modes_per_axis;
  normalizers_.resize(n);
  weights_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Mode k = mode(i);
    const double f1 = k.k1 == 0 ? extents.x() : extents.x() / 2.0;
    const double f2 = k.k2 == 0 ? extents.y() : extents.y() / 2.0;
    normalizers_(i) = std::sqrt(f1 * f2);
    const double norm2 = static_cast<double>(k.k1 * k.k1 + k.k2 * k.k2);
    weights_(i) = std::pow(1.0 + norm2, -1.5);
  }
}

void SpectralBasis::require_contains(const Point& x) const {
  if (!contains(x)) {
    std::ostringstream msg;
    msg << "point (" << x.x() << ", " << x.y() << ") outside domain [0, " << extents_.x() << "] x [0, "
        << extents_.y() << "]";
    throw DomainError(msg.str());
  }
}

void SpectralBasis::require_size(const CoeffVector& c, const char* what) const {
  if (c.size() != size()) {
    throw DimensionError(std::string(what) + " has " + std::to_string(c.size()) + " coefficients, basis has " +
                         std::to_string(size()));
  }
}

CoeffVector eval_all_unchecked(const SpectralBasis& basis, const Point& x) {
  const int K = basis.modes_per_axis();
  const Eigen::ArrayXd cx = axis_cosines(K, x.x(), basis.extents().x());
  const Eigen::ArrayXd cy = axis_cosines(K, x.y(), basis.extents().y());
  CoeffVector values(basis.size());
  Eigen::Map<Eigen::MatrixXd>(values.data(), K, K).noalias() = cx.matrix() * cy.matrix().transpose();
  values.array() /= basis.normalizers();
  return values;
}

CoeffVector eval_all(const SpectralBasis& basis, const Point& x) {
  basis.require_contains(x);
  return eval_all_unchecked(basis, x);
}

Eigen::MatrixX2d eval_all_gradients_unchecked(const SpectralBasis& basis, const Point& x) {
  const int K = basis.modes_per_axis();
  const auto& L = basis.extents();
  const Eigen::ArrayXd ks = Eigen::ArrayXd::LinSpaced(K, 0.0, K - 1.0);
  const Eigen::ArrayXd cx = axis_cosines(K, x.x(), L.x());
  const Eigen::ArrayXd cy = axis_cosines(K, x.y(), L.y());
  const Eigen::ArrayXd dx = -axis_sines(K, x.x(), L.x()) * ks * (std::numbers::pi / L.x());
  const Eigen::ArrayXd dy = -axis_sines(K, x.y(), L.y()) * ks * (std::numbers::pi / L.y());

  Eigen::MatrixX2d grad(basis.size(), 2);
  Eigen::Map<Eigen::MatrixXd>(grad.col(0).data(), K, K).noalias() = dx.matrix() * cy.matrix().transpose();
  Eigen::Map<Eigen::MatrixXd>(grad.col(1).data(), K, K).noalias() = cx.matrix() * dy.matrix().transpose();
  grad.col(0).array() /= basis.normalizers();
  grad.col(1).array() /= basis.normalizers();
  return grad;
}

DensityMap::DensityMap(Eigen::MatrixXd grid, const Eigen::Vector2d& extents)
    : grid_(std::move(grid)), extents_(extents) {
  if (grid_.size() == 0) {
    throw ConfigError("density grid is empty");
  }
  if (!(extents.x() > 0.0) || !(extents.y() > 0.0)) {
    throw ConfigError("density extents must be positive");
  }
  if (!grid_.allFinite() || (grid_.array() < 0.0).any()) {
    throw Error("density cells must be finite and nonnegative");
  }
}

DensityMap DensityMap::normalized(Eigen::MatrixXd grid, const Eigen::Vector2d& extents) {
  DensityMap map(std::move(grid), extents);
  const double mass = map.mass();
  if (!(mass > 0.0)) {
    throw NormalizationError("density has zero mass");
  }
  map.grid_ /= mass;
  return map;
}

Point DensityMap::cell_center(Eigen::Index row, Eigen::Index col) const noexcept {
  const double cw = extents_.x() / static_cast<double>(cols());
  const double ch = extents_.y() / static_cast<double>(rows());
  return {(static_cast<double>(col) + 0.5) * cw, extents_.y() - (static_cast<double>(row) + 0.5) * ch};
}

CoeffVector transform_density(const SpectralBasis& basis, const DensityMap& density) {
  if (basis.extents() != density.extents()) {
    throw DimensionError("density extents differ from basis extents");
  }
  if (std::abs(density.mass() - 1.0) > 1e-9) {
    throw NormalizationError("density mass is " + std::to_string(density.mass()) + ", expected 1");
  }
  const int K = basis.modes_per_axis();
  const auto& L = basis.extents();
  const Eigen::Index R = density.rows();
  const Eigen::Index C = density.cols();

  // cos(k pi x / L) sampled at column / row centers.
  Eigen::MatrixXd cos_x(K, C);
  for (Eigen::Index c = 0; c < C; ++c) {
    cos_x.col(c) = axis_cosines(K, density.cell_center(0, c).x(), L.x()).matrix();
  }
  Eigen::MatrixXd cos_y(K, R);
  for (Eigen::Index r = 0; r < R; ++r) {
    cos_y.col(r) = axis_cosines(K, density.cell_center(r, 0).y(), L.y()).matrix();
  }

  CoeffVector phi(basis.size());
  Eigen::Map<Eigen::MatrixXd>(phi.data(), K, K).noalias() =
      cos_x * density.grid().transpose() * cos_y.transpose() * density.cell_area();
  phi.array() /= basis.normalizers();
  // Unit mass times the constant basis value.
  phi(0) = 1.0 / basis.normalizers()(0);
  return phi;
}

TrajectoryStats::TrajectoryStats(Eigen::Index size)
    : sums_(CoeffVector::Zero(size)), sums_comp_(CoeffVector::Zero(size)) {}

void TrajectoryStats::add_sample(const CoeffVector& basis_values, double dt) {
  if (basis_values.size() != sums_.size()) {
    throw DimensionError("sample size differs from statistics size");
  }
  for (Eigen::Index i = 0; i < sums_.size(); ++i) {
    neumaier_add(sums_(i), sums_comp_(i), basis_values(i) * dt);
  }
  neumaier_add(elapsed_, elapsed_comp_, dt);
}

void TrajectoryStats::merge(const TrajectoryStats& other) {
  if (other.size() != size()) {
    throw DimensionError("cannot pool statistics of different sizes");
  }
  for (Eigen::Index i = 0; i < sums_.size(); ++i) {
    neumaier_add(sums_(i), sums_comp_(i), other.sums_(i));
    neumaier_add(sums_(i), sums_comp_(i), other.sums_comp_(i));
  }
  neumaier_add(elapsed_, elapsed_comp_, other.elapsed_);
  neumaier_add(elapsed_, elapsed_comp_, other.elapsed_comp_);
}

CoeffVector TrajectoryStats::coefficients() const {
  const double t = elapsed();
  if (!(t > 0.0)) {
    throw Error("trajectory statistics have no elapsed time");
  }
  return sums() / t;
}

void accumulate_trajectory(const SpectralBasis& basis, TrajectoryStats& stats, const Point& x, double dt) {
  if (!(dt > 0.0)) {
    throw Error("accumulation step must be positive");
  }
  if (stats.size() == 0) {
    stats = TrajectoryStats(basis.size());
  }
  stats.add_sample(eval_all(basis, x), dt);
}

} // namespace ergo
