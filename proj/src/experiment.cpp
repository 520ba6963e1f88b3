#include "ergopattern/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "ergopattern/comm.hpp"
#include "ergopattern/metrics.hpp"
#include "ergopattern/swarm.hpp"
#include "ergopattern/targets.hpp"
#include "ergopattern/trial_csv.hpp"

namespace ergo {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

// Team members' own coefficient vectors.
std::vector<CoeffVector> own_coefficients(const std::vector<TrajectoryStats>& stats) {
  std::vector<CoeffVector> coeffs;
  coeffs.reserve(stats.size());
  for (const auto& s : stats) coeffs.push_back(s.coefficients());
  return coeffs;
}

void draw_line(GrayImage& image, std::pair<Eigen::Index, Eigen::Index> a, std::pair<Eigen::Index, Eigen::Index> b,
               std::uint8_t level) {
  Eigen::Index r0 = a.first, c0 = a.second;
  const Eigen::Index r1 = b.first, c1 = b.second;
  const Eigen::Index dc = std::abs(c1 - c0), dr = -std::abs(r1 - r0);
  const Eigen::Index sc = c0 < c1 ? 1 : -1, sr = r0 < r1 ? 1 : -1;
  Eigen::Index err = dc + dr;
  while (true) {
    image(r0, c0) = level;
    if (r0 == r1 && c0 == c1) break;
    const Eigen::Index e2 = 2 * err;
    if (e2 >= dr) {
      err += dr;
      c0 += sc;
    }
    if (e2 <= dc) {
      err += dc;
      r0 += sr;
    }
  }
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

} // namespace

Objective load_objective(const std::string& name, const SpectralBasis& basis, bool invert, int resolution) {
  if (is_builtin_target(name)) {
    DensityMap density = builtin_target(name, basis.extents(), resolution);
    CoeffVector coeffs = transform_density(basis, density);
    return {name, std::move(density), std::move(coeffs)};
  }
  DensityMap density = load_density_image(name, basis.extents(), invert);
  CoeffVector coeffs = transform_density(basis, density);
  return {std::filesystem::path(name).stem().string(), std::move(density), std::move(coeffs)};
}

SpectralBasis make_basis(const ExperimentConfig& config) {
  return SpectralBasis(config.world.extents, config.modes_per_axis);
}

TrialRecord run_experiment_trial(const ExperimentConfig& config, const SpectralBasis& basis,
                                 const Objective& objective, CommMode mode, std::uint64_t seed) {
  return run_trial(config.world, config.control, config.comm(mode), basis, objective.coeffs, seed);
}

std::optional<double> final_heterogeneity(const TrialRecord& record, const SpectralBasis& basis) {
  if (record.team_size < 2 || record.final_stats.empty() || !(record.final_stats.front().elapsed() > 0.0)) {
    return std::nullopt;
  }
  return team_heterogeneity(own_coefficients(record.final_stats), basis);
}

double median(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<SummaryRow> summarize(const ExperimentConfig& config, const std::vector<TrialSummary>& trials) {
  std::vector<std::string> objectives;
  for (const auto& t : trials) {
    if (std::find(objectives.begin(), objectives.end(), t.objective) == objectives.end()) {
      objectives.push_back(t.objective);
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& objective : objectives) {
    for (CommMode mode : config.comm_modes) {
      std::vector<double> het, perf;
      int count = 0;
      for (const auto& t : trials) {
        if (t.objective != objective || t.mode != mode) continue;
        ++count;
        het.push_back(t.heterogeneity.value_or(std::numeric_limits<double>::quiet_NaN()));
        perf.push_back(t.performance.value_or(std::numeric_limits<double>::quiet_NaN()));
      }
      if (count == 0) continue;
      rows.push_back({to_string(mode), objective, median(het), median(perf), count});
    }
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "condition,objective,median_heterogeneity,median_performance,trials\n";
  for (const auto& r : rows) {
    out << r.condition << ',' << r.objective << ','
        << (std::isnan(r.median_heterogeneity) ? std::string() : format_double(r.median_heterogeneity)) << ','
        << (std::isnan(r.median_performance) ? std::string() : format_double(r.median_performance)) << ','
        << r.trials << '\n';
  }
}

BatchReport run_batch(const ExperimentConfig& config) {
  validate(config);
  const SpectralBasis basis = make_basis(config);
  std::vector<Objective> objectives;
  for (const auto& name : config.targets) {
    objectives.push_back(load_objective(name, basis, config.invert, config.target_resolution));
  }

  struct Job {
    std::size_t objective;
    CommMode mode;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t o = 0; o < objectives.size(); ++o) {
    for (CommMode mode : config.comm_modes) {
      for (int t = 0; t < config.trials; ++t) {
        jobs.push_back({o, mode, config.seed + static_cast<std::uint64_t>(t)});
      }
    }
  }

  const bool write = !config.out_dir.empty();
  if (write) std::filesystem::create_directories(config.out_dir);

  BatchReport report;
  report.trials.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::string first_error;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      const Objective& objective = objectives[job.objective];
      try {
        const TrialRecord record = run_experiment_trial(config, basis, objective, job.mode, job.seed);
        TrialSummary summary;
        summary.objective = objective.name;
        summary.mode = job.mode;
        summary.seed = job.seed;
        summary.heterogeneity = final_heterogeneity(record, basis);
        if (!record.dimples.empty()) {
          summary.performance = trial_performance(record, objective.coeffs, basis, config.world.metric_cadence);
        }
        if (write) {
          const std::string stem = objective.name + "_" + to_string(job.mode) + "_seed" + std::to_string(job.seed);
          summary.csv = config.out_dir / (stem + ".csv");
          write_trial_csv(summary.csv, record);
          if (config.render_images && !record.empty()) {
            write_rendered(render(record, objective.density, config.render_size), config.out_dir / stem);
          }
        }
        report.trials[i] = std::move(summary);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!failed.exchange(true)) {
          first_error = "trial with seed " + std::to_string(job.seed) + " (" + objective.name + ", " +
                        to_string(job.mode) + ") failed: " + e.what();
        }
      }
    }
  };

  unsigned workers = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, jobs.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failed) throw Error(first_error);

  report.summary = summarize(config, report.trials);
  if (write) {
    std::ofstream out(config.out_dir / "summary.csv", std::ios::binary);
    if (!out) throw IoError("cannot write summary.csv in " + config.out_dir.string());
    write_summary_csv(out, report.summary);
  }
  return report;
}

std::pair<Eigen::Index, Eigen::Index> to_pixel(const Point& x, const Eigen::Vector2d& extents, int size) {
  const double s = static_cast<double>(size);
  const auto col = static_cast<Eigen::Index>(std::floor(std::clamp(x.x() / extents.x(), 0.0, 1.0) * s));
  const auto row = static_cast<Eigen::Index>(std::floor(std::clamp((extents.y() - x.y()) / extents.y(), 0.0, 1.0) * s));
  return {std::min<Eigen::Index>(row, size - 1), std::min<Eigen::Index>(col, size - 1)};
}

RenderedImages render(const TrialRecord& record, const DensityMap& target, int size) {
  if (size < 1) throw ConfigError("render size must be positive");
  const Eigen::Vector2d& extents = target.extents();
  RenderedImages out{GrayImage::Zero(size, size), GrayImage::Zero(size, size), RgbImage(size, size)};

  for (const auto& d : record.dimples) {
    const auto [r, c] = to_pixel(d.position, extents, size);
    out.dimples(r, c) = 255;
  }

  const int n = std::max(record.team_size, 1);
  for (int agent = 0; agent < record.team_size; ++agent) {
    const auto level = static_cast<std::uint8_t>(std::lround(255.0 * (agent + 1) / n));
    std::optional<std::pair<Eigen::Index, Eigen::Index>> prev;
    for (std::size_t s = 0; s < record.steps; ++s) {
      const auto& row = record.rows[s * static_cast<std::size_t>(record.team_size) + static_cast<std::size_t>(agent)];
      const auto pixel = to_pixel(row.position, extents, size);
      draw_line(out.trajectories, prev.value_or(pixel), pixel, level);
      prev = pixel;
    }
  }

  // Black -> red -> yellow -> white.
  const double peak = target.grid().maxCoeff();
  for (Eigen::Index r = 0; r < size; ++r) {
    for (Eigen::Index c = 0; c < size; ++c) {
      const Eigen::Index gr = r * target.rows() / size;
      const Eigen::Index gc = c * target.cols() / size;
      const double t = peak > 0.0 ? target.grid()(gr, gc) / peak : 0.0;
      out.target.r(r, c) = to_byte(3.0 * t);
      out.target.g(r, c) = to_byte(3.0 * t - 1.0);
      out.target.b(r, c) = to_byte(3.0 * t - 2.0);
    }
  }
  return out;
}

void write_rendered(const RenderedImages& images, const std::filesystem::path& stem) {
  write_pgm(stem.string() + "_dimples.pgm", images.dimples);
  write_pgm(stem.string() + "_trajectories.pgm", images.trajectories);
  write_ppm(stem.string() + "_target.ppm", images.target);
}

AnalysisRow analyze_record(const TrialRecord& record, const SpectralBasis& basis, const CoeffVector& phi,
                           std::size_t cadence, const std::string& source) {
  AnalysisRow row;
  row.source = source;
  row.agents = record.team_size;
  row.steps = record.steps;
  row.dimples = record.dimples.size();
  if (record.empty()) return row;

  std::vector<TrajectoryStats> stats(record.team_size, TrajectoryStats(basis.size()));
  for (const auto& r : record.rows) {
    accumulate_trajectory(basis, stats[r.agent_id], r.position, record.dt);
  }
  row.ergodic_metric = ergodic_metric(pool(stats).coefficients(), phi, basis);
  if (record.team_size >= 2) {
    row.heterogeneity = team_heterogeneity(own_coefficients(stats), basis);
  }
  if (!record.dimples.empty()) {
    row.performance = trial_performance(record, phi, basis, cadence);
  }
  return row;
}

std::vector<AnalysisRow> analyze(const std::vector<std::filesystem::path>& paths, const SpectralBasis& basis,
                                 const CoeffVector& phi, std::size_t cadence) {
  std::vector<AnalysisRow> rows;
  for (const auto& path : paths) {
    rows.push_back(analyze_record(read_trial_csv(path), basis, phi, cadence, path.string()));
  }
  return rows;
}

void write_analysis_csv(std::ostream& out, const std::vector<AnalysisRow>& rows) {
  out << "source,agents,steps,dimples,ergodic_metric,heterogeneity,performance\n";
  for (const auto& r : rows) {
    out << r.source << ',' << r.agents << ',' << r.steps << ',' << r.dimples << ',' << format_double(r.ergodic_metric)
        << ',' << format_optional(r.heterogeneity) << ',' << format_optional(r.performance) << '\n';
  }
}

} // namespace ergo
