#include "ergopattern/targets.hpp"

#include <algorithm>
#include <cmath>

#include "ergopattern/image.hpp"

namespace ergo {

namespace {

double gaussian(const Point& x, const Point& center, double sigma) {
  return std::exp(-0.5 * (x - center).squaredNorm() / (sigma * sigma));
}

} // namespace

const std::vector<std::string>& builtin_target_names() {
  static const std::vector<std::string> names{"uniform", "gradient", "two-lobe", "ring-blob"};
  return names;
}

bool is_builtin_target(const std::string& name) {
  const auto& names = builtin_target_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

DensityMap builtin_target(const std::string& name, const Eigen::Vector2d& extents, int resolution) {
  if (!is_builtin_target(name)) {
    throw ConfigError("unknown built-in target '" + name + "'");
  }
  if (resolution < 1) throw ConfigError("target resolution must be >= 1");
  Eigen::MatrixXd grid(resolution, resolution);
  const DensityMap layout(Eigen::MatrixXd::Ones(resolution, resolution), extents);
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      // Unit-square coordinates of the cell center.
      const Point p = layout.cell_center(r, c).cwiseQuotient(extents);
      double v = 1.0;
      if (name == "gradient") {
        // Dense on the left, sparse on the right.
        v = 1.0 - 0.9 * p.x();
      } else if (name == "two-lobe") {
        v = gaussian(p, {0.32, 0.65}, 0.12) + 0.8 * gaussian(p, {0.68, 0.35}, 0.12);
      } else if (name == "ring-blob") {
        const double ring = std::exp(-0.5 * std::pow(((p - Point(0.45, 0.5)).norm() - 0.28) / 0.05, 2));
        v = ring + 1.2 * gaussian(p, {0.78, 0.72}, 0.07);
      }
      grid(r, c) = v;
    }
  }
  return DensityMap::normalized(std::move(grid), extents);
}

DensityMap density_from_samples(const Eigen::MatrixXd& samples, const Eigen::Vector2d& extents, bool invert) {
  Eigen::MatrixXd grid = invert ? Eigen::MatrixXd((1.0 - samples.array()).matrix()) : samples;
  if (!(grid.sum() > 0.0)) {
    throw NormalizationError("density image has zero mass");
  }
  return DensityMap::normalized(std::move(grid), extents);
}

DensityMap load_density_image(const std::filesystem::path& path, const Eigen::Vector2d& extents, bool invert) {
  return density_from_samples(read_pgm(path).samples, extents, invert);
}

} // namespace ergo
