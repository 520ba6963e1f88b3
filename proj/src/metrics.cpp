#include "ergopattern/metrics.hpp"

#include <cmath>
#include <numbers>

namespace ergo {

double ergodic_metric(const CoeffVector& c, const CoeffVector& phi, const SpectralBasis& basis) {
  basis.require_size(c, "trajectory coefficients");
  basis.require_size(phi, "target coefficients");
  return (basis.weights() * (c - phi).array().square()).sum();
}

double heterogeneity(const CoeffVector& ci, const CoeffVector& cj, const SpectralBasis& basis) {
  basis.require_size(ci, "first agent coefficients");
  basis.require_size(cj, "second agent coefficients");
  return (basis.weights() * (ci - cj).array().square()).sum();
}

std::vector<double> pair_heterogeneity(std::span<const CoeffVector> coeffs, const SpectralBasis& basis) {
  std::vector<double> out;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    for (std::size_t j = i + 1; j < coeffs.size(); ++j) {
      out.push_back(heterogeneity(coeffs[i], coeffs[j], basis));
    }
  }
  return out;
}

double team_heterogeneity(std::span<const CoeffVector> coeffs, const SpectralBasis& basis) {
  if (coeffs.size() < 2) {
    throw InsufficientAgentsError("team heterogeneity needs at least two agents");
  }
  const std::vector<double> pairs = pair_heterogeneity(coeffs, basis);
  double total = 0.0;
  for (double v : pairs) total += v;
  return total / static_cast<double>(pairs.size());
}

namespace {

void apply_kernel(CoeffVector& d, const SpectralBasis& basis, double width) {
  const auto& L = basis.extents();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const Mode k = basis.mode(i);
    const double w1 = k.k1 * std::numbers::pi / L.x();
    const double w2 = k.k2 * std::numbers::pi / L.y();
    d(i) *= std::exp(-0.5 * width * width * (w1 * w1 + w2 * w2));
  }
}

} // namespace

CoeffVector dimple_coeffs(std::span<const DimpleEvent> events, const SpectralBasis& basis,
                          std::optional<double> kernel_width) {
  if (events.empty()) {
    throw UndefinedDistributionError("no dimples: empirical distribution undefined");
  }
  CoeffVector d = CoeffVector::Zero(basis.size());
  for (const auto& e : events) {
    d += eval_all(basis, e.position);
  }
  d /= static_cast<double>(events.size());
  if (kernel_width) {
    if (!(*kernel_width > 0.0)) throw ConfigError("dimple kernel width must be positive");
    apply_kernel(d, basis, *kernel_width);
  }
  return d;
}

std::vector<double> dimple_performance_series(const TrialRecord& record, const CoeffVector& phi,
                                              const SpectralBasis& basis, std::size_t cadence) {
  if (cadence == 0) throw ConfigError("metric cadence must be >= 1");
  basis.require_size(phi, "target coefficients");
  std::vector<double> series;
  CoeffVector sum = CoeffVector::Zero(basis.size());
  std::size_t count = 0;
  std::size_t next = 0;
  for (std::size_t s = 0; s < record.steps; ++s) {
    while (next < record.dimples.size() && record.dimples[next].step <= s) {
      sum += eval_all(basis, record.dimples[next].position);
      ++count;
      ++next;
    }
    if ((s + 1) % cadence != 0 && s + 1 != record.steps) continue;
    series.push_back(count == 0 ? std::numeric_limits<double>::quiet_NaN()
                                : ergodic_metric(sum / static_cast<double>(count), phi, basis));
  }
  return series;
}

double trial_performance(const TrialRecord& record, const CoeffVector& phi, const SpectralBasis& basis,
                         std::size_t cadence) {
  if (record.dimples.empty()) {
    throw UndefinedDistributionError("trial placed no dimples: performance undefined");
  }
  const std::vector<double> series = dimple_performance_series(record, phi, basis, cadence);
  double total = 0.0;
  std::size_t n = 0;
  for (double v : series) {
    if (std::isnan(v)) continue;
    total += v;
    ++n;
  }
  return total / static_cast<double>(n);
}

} // namespace ergo
