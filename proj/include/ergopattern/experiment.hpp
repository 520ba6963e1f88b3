#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ergopattern/config.hpp"
#include "ergopattern/image.hpp"
#include "ergopattern/record.hpp"
#include "ergopattern/spectral.hpp"

namespace ergo {

/// A coverage objective: its raster and its basis coefficients.
struct Objective {
  std::string name;
  DensityMap density;
  CoeffVector coeffs;
};

/// Built-in name or graymap path; file objectives are named by file stem.
Objective load_objective(const std::string& name, const SpectralBasis& basis, bool invert = false,
                         int resolution = 128);

SpectralBasis make_basis(const ExperimentConfig& config);

TrialRecord run_experiment_trial(const ExperimentConfig& config, const SpectralBasis& basis,
                                 const Objective& objective, CommMode mode, std::uint64_t seed);

/// Final-step team heterogeneity of a record; nullopt for single agents.
std::optional<double> final_heterogeneity(const TrialRecord& record, const SpectralBasis& basis);

struct TrialSummary {
  std::string objective;
  CommMode mode = CommMode::none;
  std::uint64_t seed = 0;
  std::optional<double> heterogeneity;
  std::optional<double> performance;
  std::filesystem::path csv;
};

struct SummaryRow {
  std::string condition;
  std::string objective;
  double median_heterogeneity = 0.0;
  double median_performance = 0.0;
  int trials = 0;
};

struct BatchReport {
  std::vector<TrialSummary> trials;
  std::vector<SummaryRow> summary;
};

/// Median of the finite entries; NaN when there are none.
double median(std::vector<double> values);

/// Runs trials with seeds seed..seed+trials-1 for every target and comm
/// mode, in parallel across trials. With a non-empty out_dir, writes one
/// CSV (and images) per trial plus summary.csv. Fails fast on the first
/// trial error, naming its seed.
BatchReport run_batch(const ExperimentConfig& config);

/// Per-condition medians, in target-then-mode order of the config.
std::vector<SummaryRow> summarize(const ExperimentConfig& config, const std::vector<TrialSummary>& trials);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

struct RenderedImages {
  /// White dot per dimple on black.
  GrayImage dimples;
  /// One gray level per agent on black.
  GrayImage trajectories;
  /// Target density as a heat map.
  RgbImage target;
};

RenderedImages render(const TrialRecord& record, const DensityMap& target, int size);
/// Writes <stem>_dimples.pgm, <stem>_trajectories.pgm and <stem>_target.ppm.
void write_rendered(const RenderedImages& images, const std::filesystem::path& stem);

/// Pixel (row, col) of a workspace point in a size x size render.
std::pair<Eigen::Index, Eigen::Index> to_pixel(const Point& x, const Eigen::Vector2d& extents, int size);

/// Metrics recomputed from logged positions and dimples.
struct AnalysisRow {
  std::string source;
  int agents = 0;
  std::size_t steps = 0;
  std::size_t dimples = 0;
  double ergodic_metric = 0.0;
  std::optional<double> heterogeneity;
  std::optional<double> performance;
};

/// Rebuilds each agent's statistics from its logged positions, then scores
/// the team. Never reads the logged metric columns.
AnalysisRow analyze_record(const TrialRecord& record, const SpectralBasis& basis, const CoeffVector& phi,
                           std::size_t cadence = 10, const std::string& source = {});
std::vector<AnalysisRow> analyze(const std::vector<std::filesystem::path>& paths, const SpectralBasis& basis,
                                 const CoeffVector& phi, std::size_t cadence = 10);
void write_analysis_csv(std::ostream& out, const std::vector<AnalysisRow>& rows);

} // namespace ergo
