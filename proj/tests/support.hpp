#pragma once

// Independent oracles for the unit and acceptance tests. Nothing here calls
// into the library's evaluation paths.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double normalizer(int k1, int k2, double L1, double L2) {
  const double a = k1 == 0 ? L1 : L1 / 2.0;
  const double b = k2 == 0 ? L2 : L2 / 2.0;
  return std::sqrt(a * b);
}

inline double basis(int k1, int k2, double x, double y, double L1 = 1.0, double L2 = 1.0) {
  const double pi = std::numbers::pi;
  return std::cos(k1 * pi * x / L1) * std::cos(k2 * pi * y / L2) / normalizer(k1, k2, L1, L2);
}

inline double weight(int k1, int k2) { return std::pow(1.0 + k1 * k1 + k2 * k2, -1.5); }

// Basis values at (x, y), k1 fastest.
inline Eigen::VectorXd basis_vector(int K, double x, double y, double L1 = 1.0, double L2 = 1.0) {
  Eigen::VectorXd v(K * K);
  for (int k2 = 0; k2 < K; ++k2)
    for (int k1 = 0; k1 < K; ++k1) v(k1 + K * k2) = basis(k1, k2, x, y, L1, L2);
  return v;
}

inline double metric(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int K) {
  double sum = 0.0;
  for (int k2 = 0; k2 < K; ++k2)
    for (int k1 = 0; k1 < K; ++k1) {
      const double d = a(k1 + K * k2) - b(k1 + K * k2);
      sum += weight(k1, k2) * d * d;
    }
  return sum;
}

// Naive midpoint quadrature of a grid (row 0 = top) against one mode.
inline double transform(const Eigen::MatrixXd& grid, int k1, int k2, double L1 = 1.0, double L2 = 1.0) {
  const double cw = L1 / grid.cols();
  const double ch = L2 / grid.rows();
  double sum = 0.0;
  for (Eigen::Index r = 0; r < grid.rows(); ++r)
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      const double x = (c + 0.5) * cw;
      const double y = L2 - (r + 0.5) * ch;
      sum += grid(r, c) * basis(k1, k2, x, y, L1, L2) * cw * ch;
    }
  return sum;
}

// Two-sample-free KS statistic of samples against Uniform(lo, hi).
inline double ks_uniform(std::vector<double> samples, double lo, double hi) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = (samples[i] - lo) / (hi - lo);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

// Asymptotic KS critical value at alpha = 0.01.
inline double ks_critical_001(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

} // namespace oracle
