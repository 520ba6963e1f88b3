#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ergopattern/spectral.hpp"

namespace ergo {

/// Names accepted by builtin_target: uniform, gradient, two-lobe, ring-blob.
/// two-lobe and ring-blob stand in for the club and balloon-dog objectives.
const std::vector<std::string>& builtin_target_names();

bool is_builtin_target(const std::string& name);

/// Built-in objective rasterized at `resolution` x `resolution` and
/// normalized to unit mass. Throws ConfigError for unknown names.
DensityMap builtin_target(const std::string& name, const Eigen::Vector2d& extents, int resolution = 128);

/// Graymap intensities mapped linearly to density (white = dense unless
/// `invert`), normalized to unit mass. Row 0 is the top of the domain.
/// Throws IoError for unreadable files, NormalizationError for all-zero
/// images.
DensityMap load_density_image(const std::filesystem::path& path, const Eigen::Vector2d& extents, bool invert = false);

/// Same as load_density_image for already-decoded samples in [0, 1].
DensityMap density_from_samples(const Eigen::MatrixXd& samples, const Eigen::Vector2d& extents, bool invert = false);

} // namespace ergo
