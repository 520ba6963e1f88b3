// Batch simulation front end: run | batch | render | analyze.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ergopattern/config.hpp"
#include "ergopattern/experiment.hpp"
#include "ergopattern/metrics.hpp"
#include "ergopattern/trial_csv.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<long long> seed;
  std::string comm;
  std::string target;
  std::optional<int> agents;
  std::optional<double> duration;
  std::string out;
  std::vector<std::string> settings;
};

void add_common(CLI::App* app, CommonOptions& o, bool with_comm) {
  app->add_option("--config", o.config_path, "flat key = value config file")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "base seed");
  if (with_comm) app->add_option("--comm", o.comm, "none | full | both");
  app->add_option("--target", o.target, "built-in target name(s) or graymap path(s), comma separated");
  app->add_option("--agents", o.agents, "team size");
  app->add_option("--duration", o.duration, "simulated seconds");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--set", o.settings, "override any config key: --set key=value (repeatable)");
}

ergo::ExperimentConfig build_config(const CommonOptions& o) {
  ergo::ExperimentConfig config = o.config_path.empty() ? ergo::ExperimentConfig{} : ergo::load_config(o.config_path);
  if (o.seed) ergo::apply_setting(config, "seed", std::to_string(*o.seed));
  if (!o.comm.empty()) ergo::apply_setting(config, "comm", o.comm);
  if (!o.target.empty()) ergo::apply_setting(config, "target", o.target);
  if (o.agents) ergo::apply_setting(config, "agents", std::to_string(*o.agents));
  if (o.duration) ergo::apply_setting(config, "duration", std::to_string(*o.duration));
  if (!o.out.empty()) ergo::apply_setting(config, "out", o.out);
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ergo::ConfigError("--set expects key=value, got '" + s + "'");
    ergo::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  ergo::validate(config);
  return config;
}

int cmd_run(const CommonOptions& o) {
  const auto config = build_config(o);
  const auto basis = ergo::make_basis(config);
  const auto objective =
      ergo::load_objective(config.targets.front(), basis, config.invert, config.target_resolution);
  const auto mode = config.comm_modes.front();
  const auto record = ergo::run_experiment_trial(config, basis, objective, mode, config.seed);

  std::filesystem::create_directories(config.out_dir);
  const std::string stem = objective.name + "_" + ergo::to_string(mode) + "_seed" + std::to_string(config.seed);
  const auto csv = config.out_dir / (stem + ".csv");
  ergo::write_trial_csv(csv, record);
  if (config.render_images && !record.empty()) {
    ergo::write_rendered(ergo::render(record, objective.density, config.render_size), config.out_dir / stem);
  }

  std::cout << "wrote " << csv.string() << "\n";
  std::cout << "steps " << record.steps << ", dimples " << record.dimples.size() << ", collisions "
            << record.decorrelations.size() << "\n";
  if (!record.empty()) {
    std::cout << "final ergodic metric " << record.rows.back().ergodic_metric << "\n";
    if (const auto h = ergo::final_heterogeneity(record, basis)) std::cout << "team heterogeneity " << *h << "\n";
    if (!record.dimples.empty()) {
      std::cout << "performance "
                << ergo::trial_performance(record, objective.coeffs, basis, config.world.metric_cadence) << "\n";
    }
  }
  return 0;
}

int cmd_batch(const CommonOptions& o) {
  const auto config = build_config(o);
  const auto report = ergo::run_batch(config);
  ergo::write_summary_csv(std::cout, report.summary);
  std::cerr << "wrote " << report.trials.size() << " trials to " << config.out_dir.string() << "\n";
  return 0;
}

int cmd_render(const CommonOptions& o, const std::string& log) {
  const auto config = build_config(o);
  const auto basis = ergo::make_basis(config);
  const auto objective =
      ergo::load_objective(config.targets.front(), basis, config.invert, config.target_resolution);
  const auto record = ergo::read_trial_csv(log);
  if (record.empty()) throw ergo::Error(log + ": trial log has no rows");
  std::filesystem::create_directories(config.out_dir);
  const auto stem = config.out_dir / std::filesystem::path(log).stem();
  ergo::write_rendered(ergo::render(record, objective.density, config.render_size), stem);
  std::cout << "wrote " << stem.string() << "_{dimples,trajectories}.pgm, _target.ppm\n";
  return 0;
}

int cmd_analyze(const CommonOptions& o, const std::vector<std::string>& logs, const std::string& metrics_out) {
  const auto config = build_config(o);
  const auto basis = ergo::make_basis(config);
  const auto objective =
      ergo::load_objective(config.targets.front(), basis, config.invert, config.target_resolution);
  std::vector<std::filesystem::path> paths(logs.begin(), logs.end());
  const auto rows = ergo::analyze(paths, basis, objective.coeffs, config.world.metric_cadence);
  if (metrics_out.empty()) {
    ergo::write_analysis_csv(std::cout, rows);
  } else {
    std::ofstream out(metrics_out, std::ios::binary);
    if (!out) throw ergo::IoError("cannot write " + metrics_out);
    ergo::write_analysis_csv(out, rows);
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized ergodic patterning simulator"};
  app.require_subcommand(1);

  CommonOptions run_opts, batch_opts, render_opts, analyze_opts;
  auto* run = app.add_subcommand("run", "simulate one trial (first comm mode, first target)");
  add_common(run, run_opts, true);

  auto* batch = app.add_subcommand("batch", "trials x targets x comm modes, with a median summary");
  add_common(batch, batch_opts, true);

  std::string render_log;
  auto* render = app.add_subcommand("render", "draw dimple, trajectory and target images for a trial log");
  add_common(render, render_opts, false);
  render->add_option("log", render_log, "trial CSV")->required()->check(CLI::ExistingFile);

  std::vector<std::string> analyze_logs;
  std::string metrics_out;
  auto* analyze = app.add_subcommand("analyze", "recompute metrics from trial logs");
  add_common(analyze, analyze_opts, false);
  analyze->add_option("logs", analyze_logs, "trial CSVs")->required()->check(CLI::ExistingFile);
  analyze->add_option("--metrics", metrics_out, "write the metrics CSV here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts);
    if (*batch) return cmd_batch(batch_opts);
    if (*render) return cmd_render(render_opts, render_log);
    if (*analyze) return cmd_analyze(analyze_opts, analyze_logs, metrics_out);
  } catch (const ergo::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
