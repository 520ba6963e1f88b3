#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ergopattern/record.hpp"
#include "ergopattern/spectral.hpp"

namespace ergo {

/// E = sum_k Lambda_k (c_k - phi_k)^2.
double ergodic_metric(const CoeffVector& c, const CoeffVector& phi, const SpectralBasis& basis);

/// E_ij = sum_k Lambda_k (c_ki - c_kj)^2.
double heterogeneity(const CoeffVector& ci, const CoeffVector& cj, const SpectralBasis& basis);

/// Pairwise heterogeneity in (0,1), (0,2), ..., (N-2,N-1) order.
std::vector<double> pair_heterogeneity(std::span<const CoeffVector> coeffs, const SpectralBasis& basis);

/// Mean over all N(N-1)/2 unordered pairs. Throws InsufficientAgentsError for N < 2.
double team_heterogeneity(std::span<const CoeffVector> coeffs, const SpectralBasis& basis);

/// Empirical coefficients d_k = (1/M) sum_m F_k(p_m) of a set of dimples.
/// With `kernel_width` set, the delta measure is smoothed by a Gaussian of
/// that standard deviation (applied per mode as exp(-sigma^2 |omega_k|^2 / 2)).
CoeffVector dimple_coeffs(std::span<const DimpleEvent> events, const SpectralBasis& basis,
                          std::optional<double> kernel_width = std::nullopt);

/// Ergodic metric of the dimples placed up to each sampled step, sampled
/// at steps s with (s + 1) % cadence == 0 (and the final step); NaN before
/// the first dimple.
std::vector<double> dimple_performance_series(const TrialRecord& record, const CoeffVector& phi,
                                              const SpectralBasis& basis, std::size_t cadence = 10);

/// Time average of dimple_performance_series over samples after the first
/// dimple. Throws UndefinedDistributionError when the trial placed no dimples.
double trial_performance(const TrialRecord& record, const CoeffVector& phi, const SpectralBasis& basis,
                         std::size_t cadence = 10);

} // namespace ergo
