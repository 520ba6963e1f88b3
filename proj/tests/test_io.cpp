#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "ergopattern/config.hpp"
#include "ergopattern/experiment.hpp"
#include "ergopattern/image.hpp"
#include "ergopattern/metrics.hpp"
#include "ergopattern/targets.hpp"
#include "ergopattern/trial_csv.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace ergo;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("ergopattern-test-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

ExperimentConfig small_config(const fs::path& out) {
  ExperimentConfig c;
  c.targets = {"two-lobe"};
  c.world.duration = 20.0;
  c.modes_per_axis = 6;
  c.trials = 1;
  c.out_dir = out;
  c.render_size = 64;
  c.threads = 1;
  return c;
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("graymap parsing") {
  SUBCASE("ascii") {
    const Graymap g = parse_pgm("P2\n# a comment\n2 2\n255\n255 0\n0 51\n");
    CHECK(g.samples.rows() == 2);
    CHECK(g.samples(0, 0) == 1.0);
    CHECK(g.samples(1, 1) == doctest::Approx(0.2));
  }
  SUBCASE("binary 8 and 16 bit") {
    const std::string p8 = std::string("P5\n3 1\n255\n") + std::string("\x00\x80\xff", 3);
    const Graymap g8 = parse_pgm(p8);
    CHECK(g8.samples(0, 2) == 1.0);
    CHECK(g8.samples(0, 1) == doctest::Approx(128.0 / 255.0));
    const std::string p16 = std::string("P5 2 1 65535\n") + std::string("\x01\x00\xff\xff", 4);
    const Graymap g16 = parse_pgm(p16);
    CHECK(g16.maxval == 65535);
    CHECK(g16.samples(0, 0) == doctest::Approx(256.0 / 65535.0));
    CHECK(g16.samples(0, 1) == 1.0);
  }
  SUBCASE("malformed") {
    CHECK_THROWS_AS(parse_pgm("P3\n1 1\n255\n0 0 0\n"), IoError);
    CHECK_THROWS_AS(parse_pgm("P2\n2 2\n255\n1 2 3\n"), IoError);
    CHECK_THROWS_AS(parse_pgm("P5\n2 2\n255\nab"), IoError);
    CHECK_THROWS_AS(parse_pgm("P2\n1 1\n255\n300\n"), IoError);
    CHECK_THROWS_AS(read_pgm("/nonexistent/file.pgm"), IoError);
  }
  SUBCASE("encode round trip") {
    GrayImage img(2, 3);
    img << 0, 10, 20, 30, 40, 255;
    const Graymap back = parse_pgm(encode_pgm(img));
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) CHECK(std::lround(back.samples(r, c) * 255) == img(r, c));
    CHECK_THROWS_AS(encode_pgm(GrayImage(0, 0)), IoError);
    RgbImage rgb(1, 1);
    rgb.r(0, 0) = 9;
    CHECK(encode_ppm(rgb) == std::string("P6\n1 1\n255\n\x09\x00\x00", 14));
  }
}

TEST_CASE("load_density_image examples") {
  TempDir tmp;
  SUBCASE("uniform 2x2") {
    spit(tmp.path / "u.pgm", "P2\n2 2\n255\n1 1\n1 1\n");
    const DensityMap d = load_density_image(tmp.path / "u.pgm", {1.0, 1.0});
    CHECK((d.grid().array() - 1.0).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("right half carries all mass") {
    spit(tmp.path / "h.pgm", "P2\n2 1\n255\n0 255\n");
    const DensityMap d = load_density_image(tmp.path / "h.pgm", {1.0, 1.0});
    CHECK(d.grid()(0, 0) == 0.0);
    CHECK(d.grid()(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
    const DensityMap inv = load_density_image(tmp.path / "h.pgm", {1.0, 1.0}, true);
    CHECK(inv.grid()(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("row 0 is the top") {
    spit(tmp.path / "t.pgm", "P2\n1 2\n255\n255\n0\n");
    SpectralBasis basis({1.0, 1.0}, 3);
    const CoeffVector phi = transform_density(basis, load_density_image(tmp.path / "t.pgm", {1.0, 1.0}));
    // Mass in the upper half: cos(pi y) < 0 there.
    CHECK(phi(basis.index({0, 1})) < 0.0);
  }
  SUBCASE("radial symmetry") {
    GrayImage img(64, 64);
    for (int r = 0; r < 64; ++r)
      for (int c = 0; c < 64; ++c) {
        const double x = (c + 0.5) / 64.0 - 0.5, y = (r + 0.5) / 64.0 - 0.5;
        img(r, c) = static_cast<std::uint8_t>(std::lround(255.0 * std::max(0.0, 1.0 - std::hypot(x, y) / 0.8)));
      }
    write_pgm(tmp.path / "radial.pgm", img);
    SpectralBasis basis({1.0, 1.0}, 4);
    const CoeffVector phi = transform_density(basis, load_density_image(tmp.path / "radial.pgm", {1.0, 1.0}));
    CHECK(std::abs(phi(basis.index({0, 1})) - phi(basis.index({1, 0}))) < 1e-6);
  }
  SUBCASE("errors") {
    spit(tmp.path / "z.pgm", "P2\n2 2\n255\n0 0\n0 0\n");
    CHECK_THROWS_AS(load_density_image(tmp.path / "z.pgm", {1.0, 1.0}), NormalizationError);
    spit(tmp.path / "bad.pgm", "not an image");
    CHECK_THROWS_AS(load_density_image(tmp.path / "bad.pgm", {1.0, 1.0}), IoError);
  }
}

TEST_CASE("built-in targets") {
  for (const auto& name : builtin_target_names()) {
    const DensityMap d = builtin_target(name, {1.0, 1.0}, 64);
    CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.grid().minCoeff() >= 0.0);
  }
  const DensityMap g = builtin_target("gradient", {1.0, 1.0}, 32);
  CHECK(g.grid()(5, 0) > g.grid()(5, 31));  // high to low, left to right
  CHECK_THROWS_AS(builtin_target("club", {1.0, 1.0}, 32), ConfigError);
}

TEST_CASE("config parsing and validation") {
  ExperimentConfig c;
  std::istringstream in("# comment\ntarget = gradient, two-lobe\nagents = 6\ncomm = full\n\nsafe_margin = none\n");
  apply_config_stream(c, in);
  CHECK(c.targets == std::vector<std::string>{"gradient", "two-lobe"});
  CHECK(c.world.team_size == 6);
  CHECK(c.comm_modes == std::vector<CommMode>{CommMode::full});
  CHECK(!c.world.safe_margins);

  std::istringstream bad("agents = 4\nthis line has no equals sign\n");
  try {
    apply_config_stream(c, bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(apply_setting(c, "no_such_key", "1"), ConfigError);

  // Every out-of-range field is rejected with its name in the message.
  const std::vector<std::pair<std::string, std::string>> cases{
      {"agents", "0"},          {"duration", "-1"},          {"trials", "0"},
      {"modes_per_axis", "0"},  {"modes_per_axis", "40"},    {"target_resolution", "0"},
      {"horizon_steps", "0"},   {"dt", "0"},                 {"u_max", "-0.1"},
      {"turn_rate_max", "0"},   {"descent_iters", "-1"},     {"step_size", "0"},
      {"control_weight", "-1"}, {"barrier_weight", "-1"},    {"agent_radius", "0.5"},
      {"dimple_period", "0"},   {"escape_time", "-1"},       {"dynamics_substeps", "0"},
      {"metric_cadence", "0"},  {"exchange_period_steps", "0"}, {"render_size", "0"},
      {"kernel_width", "0"},    {"safe_margin", "0.6"},      {"target", "no-such-target"},
  };
  for (const auto& [key, value] : cases) {
    ExperimentConfig cfg;
    std::string message;
    try {
      apply_setting(cfg, key, value);
      validate(cfg);
    } catch (const ConfigError& e) {
      message = e.what();
    }
    INFO(key << " = " << value);
    CHECK(message.find(key) != std::string::npos);
  }
  for (const auto& [key, value] : std::vector<std::pair<std::string, std::string>>{{"agents", "x"}, {"dt", "fast"}}) {
    ExperimentConfig cfg;
    CHECK_THROWS_WITH_AS(apply_setting(cfg, key, value), doctest::Contains(key.c_str()), ConfigError);
  }
}

TEST_CASE("trial CSV round trip") {
  TempDir tmp;
  const ExperimentConfig cfg = small_config(tmp.path);
  const SpectralBasis basis = make_basis(cfg);
  const Objective obj = load_objective("two-lobe", basis);
  const TrialRecord record = run_experiment_trial(cfg, basis, obj, CommMode::full, 7);

  std::ostringstream a, b;
  write_trial_csv(a, record);
  write_trial_csv(b, run_experiment_trial(cfg, basis, obj, CommMode::full, 7));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind(std::string(kTrialCsvHeader) + "\n", 0) == 0);

  std::istringstream in(a.str());
  const TrialRecord parsed = parse_trial_csv(in);
  CHECK(parsed.team_size == record.team_size);
  CHECK(parsed.steps == record.steps);
  CHECK(parsed.dt == doctest::Approx(record.dt).epsilon(1e-15));
  CHECK(parsed.dimples.size() == record.dimples.size());
  for (std::size_t i = 0; i < record.rows.size(); ++i) {
    CHECK(parsed.rows[i].position == record.rows[i].position);
    CHECK(parsed.rows[i].ergodic_metric == record.rows[i].ergodic_metric);
  }
  std::ostringstream again;
  write_trial_csv(again, parsed);
  CHECK(again.str() == a.str());

  // Recomputed metrics match the in-memory values.
  const AnalysisRow row = analyze_record(parsed, basis, obj.coeffs);
  CHECK(std::abs(row.ergodic_metric - record.rows.back().ergodic_metric) <= 1e-9);
  CHECK(std::abs(*row.heterogeneity - *final_heterogeneity(record, basis)) <= 1e-9);
  CHECK(std::abs(*row.performance - trial_performance(record, obj.coeffs, basis)) <= 1e-9);
}

TEST_CASE("trial CSV errors") {
  const std::string header = std::string(kTrialCsvHeader) + "\n";
  auto parse_line = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_trial_csv(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(parse_line("time,x\n") == 1);
  CHECK(parse_line(header + "0.1,0,0.5,0.5,0,0,0,0,0,1,\n0.1,1,0.5,oops,0,0,0,0,0,1,\n") == 3);
  CHECK(parse_line(header + "0.1,0,0.5,0.5,0,0,0,0,0,1\n") == 2);
  CHECK(parse_line(header + "0.1,1,0.5,0.5,0,0,0,0,0,1,\n") == 2);
}

TEST_CASE("analyze examples") {
  TempDir tmp;
  ExperimentConfig cfg = small_config(tmp.path);
  const SpectralBasis basis = make_basis(cfg);
  const Objective obj = load_objective("two-lobe", basis);
  const TrialRecord team = run_experiment_trial(cfg, basis, obj, CommMode::none, 3);
  write_trial_csv(tmp.path / "team.csv", team);
  cfg.world.team_size = 1;
  const TrialRecord solo = run_experiment_trial(cfg, basis, obj, CommMode::none, 3);
  write_trial_csv(tmp.path / "solo.csv", solo);

  const auto rows = analyze({tmp.path / "team.csv", tmp.path / "team.csv", tmp.path / "solo.csv"}, basis, obj.coeffs);
  std::ostringstream out;
  write_analysis_csv(out, rows);
  std::istringstream lines(out.str());
  std::string header, first, second, third;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  std::getline(lines, third);
  CHECK(header == "source,agents,steps,dimples,ergodic_metric,heterogeneity,performance");
  CHECK(first == second);
  CHECK(!rows[2].heterogeneity);
  CHECK(rows[2].performance);
  CHECK(third.find(",,") != std::string::npos);
  CHECK(std::abs(rows[0].ergodic_metric - team.rows.back().ergodic_metric) <= 1e-9);
  CHECK(std::abs(*rows[0].heterogeneity - *final_heterogeneity(team, basis)) <= 1e-9);
}

TEST_CASE("render examples") {
  ExperimentConfig cfg;
  const DensityMap target = builtin_target("uniform", {1.0, 1.0}, 16);
  TrialRecord rec;
  rec.team_size = 1;
  rec.steps = 1;
  rec.rows.push_back({0.1, 0, Point(0.5, 0.5), 0.0, {0.0, 0.0}, false, 0, 0.0, std::nan("")});
  SUBCASE("no dimples, black map") {
    const RenderedImages img = render(rec, target, 32);
    CHECK(img.dimples.maxCoeff() == 0);
  }
  SUBCASE("center dot") {
    rec.dimples.push_back({Point(0.5, 0.5), 0.1, 0, 0});
    const RenderedImages img = render(rec, target, 33);
    CHECK(img.dimples(16, 16) == 255);
    const auto [r, c] = to_pixel(Point(0.5, 0.5), {1.0, 1.0}, 33);
    CHECK(r == 16);
    CHECK(c == 16);
    // Single dot: only pixels near the center lit.
    for (int i = 0; i < 33; ++i)
      for (int j = 0; j < 33; ++j)
        if (img.dimples(i, j) > 0) CHECK(std::max(std::abs(i - 16), std::abs(j - 16)) <= 1);
  }
  SUBCASE("four gray levels") {
    TempDir tmp;
    ExperimentConfig c4 = small_config(tmp.path);
    const SpectralBasis basis = make_basis(c4);
    const Objective obj = load_objective("two-lobe", basis);
    const TrialRecord team = run_experiment_trial(c4, basis, obj, CommMode::full, 1);
    const RenderedImages img = render(team, obj.density, 128);
    std::set<int> levels;
    for (Eigen::Index i = 0; i < img.trajectories.size(); ++i)
      if (img.trajectories.data()[i] != 0) levels.insert(img.trajectories.data()[i]);
    CHECK(levels.size() == 4);
    CHECK(img.target.rows() == 128);
    write_rendered(img, tmp.path / "x");
    CHECK(fs::exists(tmp.path / "x_dimples.pgm"));
    CHECK(fs::exists(tmp.path / "x_trajectories.pgm"));
    CHECK(slurp(tmp.path / "x_target.ppm").rfind("P6", 0) == 0);
  }
  SUBCASE("zero size") {
    CHECK_THROWS(render(rec, target, 0));
  }
}

TEST_CASE("batch") {
  TempDir tmp;
  SUBCASE("one trial") {
    ExperimentConfig cfg = small_config(tmp.path / "one");
    cfg.comm_modes = {CommMode::full};
    const BatchReport report = run_batch(cfg);
    CHECK(report.trials.size() == 1);
    CHECK(report.summary.size() == 1);
    CHECK(fs::exists(tmp.path / "one" / "two-lobe_full_seed0.csv"));
    CHECK(fs::exists(tmp.path / "one" / "two-lobe_full_seed0_dimples.pgm"));
    const std::string summary = slurp(tmp.path / "one" / "summary.csv");
    CHECK(summary.rfind("condition,objective,median_heterogeneity,median_performance,trials\n", 0) == 0);
  }
  SUBCASE("deterministic across runs and thread counts") {
    ExperimentConfig cfg = small_config(tmp.path / "a");
    cfg.trials = 3;
    cfg.render_images = false;
    run_batch(cfg);
    cfg.out_dir = tmp.path / "b";
    cfg.threads = 3;
    run_batch(cfg);
    for (const auto& entry : fs::directory_iterator(tmp.path / "a")) {
      CHECK(slurp(entry.path()) == slurp(tmp.path / "b" / entry.path().filename()));
    }
  }
  SUBCASE("summary is permutation invariant") {
    ExperimentConfig cfg = small_config("");
    cfg.trials = 5;
    cfg.render_images = false;
    const BatchReport report = run_batch(cfg);
    std::vector<TrialSummary> shuffled = report.trials;
    std::mt19937_64 rng(3);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto rows = summarize(cfg, shuffled);
    REQUIRE(rows.size() == report.summary.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].condition == report.summary[i].condition);
      CHECK(rows[i].median_heterogeneity == report.summary[i].median_heterogeneity);
      CHECK(rows[i].median_performance == report.summary[i].median_performance);
      CHECK(rows[i].trials == 5);
    }
  }
  SUBCASE("median") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK(median({1.0, std::nan(""), 5.0}) == 3.0);
    CHECK(std::isnan(median({})));
  }
}

}
