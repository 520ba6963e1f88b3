#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

namespace ergo {

using GrayImage = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Three planes of equal size.
struct RgbImage {
  GrayImage r, g, b;

  RgbImage(Eigen::Index rows, Eigen::Index cols)
      : r(GrayImage::Zero(rows, cols)), g(GrayImage::Zero(rows, cols)), b(GrayImage::Zero(rows, cols)) {}
  Eigen::Index rows() const noexcept { return r.rows(); }
  Eigen::Index cols() const noexcept { return r.cols(); }
};

/// Graymap samples normalized by maxval, plus the raw maxval.
struct Graymap {
  Eigen::MatrixXd samples;  // rows x cols in [0, 1]
  int maxval = 255;
};

/// Reads a portable graymap: P2 (ASCII) or P5 (binary, 8-bit or big-endian
/// 16-bit). Throws IoError on unreadable or malformed input.
Graymap read_pgm(const std::filesystem::path& path);
Graymap parse_pgm(const std::string& bytes);

/// Binary 8-bit graymap (P5).
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
std::string encode_pgm(const GrayImage& image);

/// Binary 8-bit pixmap (P6).
void write_ppm(const std::filesystem::path& path, const RgbImage& image);
std::string encode_ppm(const RgbImage& image);

} // namespace ergo
