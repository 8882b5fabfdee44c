// Config resolution, preset bundles, and end-to-end reproducibility of the
// preset runner's artifacts.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "svgd/config.hpp"
#include "svgd/io.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("svgd_cfg_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Trajectory contents with the wall-clock column blanked; wall time is the
// one legitimately non-reproducible column.
std::string strip_wall_ms(const fs::path& p) {
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  std::vector<std::string> columns;
  std::stringstream hs(header);
  std::string name;
  int wall_index = -1, at = 0;
  while (std::getline(hs, name, ',')) {
    if (name == "wall_ms") wall_index = at;
    ++at;
  }
  REQUIRE(wall_index >= 0);
  std::string out = header + "\n";
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string cell;
    int idx = 0;
    while (std::getline(ls, cell, ',')) {
      out += (idx == wall_index ? std::string("_") : cell);
      out += ',';
      ++idx;
    }
    out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("preset bundles resolve the documented parameters") {
  SUBCASE("fig3") {
    svgd::RunConfig cfg = svgd::parse_config({{"preset", "fig3-1d-mixture"}, {"beta", "-0.5"}}, {});
    CHECK(cfg.preset == svgd::Preset::fig3_1d_mixture);
    CHECK(cfg.target == "mixture");
    CHECK(cfg.mixture_weights == std::vector<double>{0.4, 0.6});
    CHECK(cfg.mixture_means[0][0] == 2.0);
    CHECK(cfg.mixture_means[1][0] == 6.0);
    CHECK(cfg.iters == 100);
    CHECK(cfg.particles == 200);
    CHECK(cfg.beta == -0.5);
  }

  SUBCASE("fig9") {
    svgd::RunConfig cfg = svgd::parse_config({{"preset", "fig9-2d-mixture"}}, {});
    CHECK(cfg.gamma == 0.2);
    CHECK(cfg.tau == 0.01);
    CHECK(cfg.refresh_period == 20);
    CHECK(cfg.mirror_iters == 40);
    CHECK(cfg.mirror_step == 0.3);
    CHECK(cfg.iters == 500);
    CHECK(cfg.init_mean == std::vector<double>{-2.0, 0.0});
    CHECK(cfg.dim == 2);
  }

  SUBCASE("fig5") {
    svgd::RunConfig cfg = svgd::parse_config({{"preset", "fig5-gaussian-ksd"}}, {});
    CHECK(cfg.target == "gaussian");
    CHECK(cfg.dim == 10);
    CHECK(cfg.particles == 300);
    CHECK(cfg.gamma == 0.1);
    CHECK(cfg.refresh_period == 1);
    REQUIRE(cfg.ksd_bandwidth.has_value());
    CHECK(*cfg.ksd_bandwidth == "median");
  }

  SUBCASE("flow preset carries the grid block") {
    svgd::RunConfig cfg = svgd::parse_config({{"preset", "flow-thm31"}}, {});
    CHECK(cfg.grid_cells == 2048);
    CHECK(cfg.horizon == 50.0);
    CHECK(cfg.rho0_mean == -2.0);
    CHECK(cfg.gaussian_mean == std::vector<double>{2.0});
  }
}

TEST_CASE("config validation names the offending key") {
  SUBCASE("beta domain") {
    try {
      svgd::parse_config({{"preset", "fig3-1d-mixture"}, {"beta", "-1.5"}}, {});
      FAIL("expected error");
    } catch (const svgd::ConfigError& e) {
      CHECK(e.key == "beta");
      CHECK(std::string(e.what()).find("beta must exceed -1") != std::string::npos);
    }
  }

  SUBCASE("unknown keys are rejected") {
    try {
      svgd::parse_config({{"stepsize", "0.1"}}, {});
      FAIL("expected error");
    } catch (const svgd::ConfigError& e) {
      CHECK(e.key == "stepsize");
    }
  }

  SUBCASE("type mismatches are rejected") {
    CHECK_THROWS_AS(svgd::parse_config({{"iters", "\"many\""}}, {}), svgd::ConfigError);
    CHECK_THROWS_AS(svgd::parse_config({{"tau", "0"}}, {}), svgd::ConfigError);
    CHECK_THROWS_AS(svgd::parse_config({{"bandwidth", "narrow"}}, {}), svgd::ConfigError);
  }
}

TEST_CASE("CLI values override file values") {
  TempDir tmp("prec");
  fs::path cfg_path = tmp.path / "cfg.json";
  {
    std::ofstream out(cfg_path);
    out << R"({"preset": "fig3-1d-mixture", "gamma": 0.5, "iters": 7})";
  }
  svgd::RunConfig cfg = svgd::parse_config({{"gamma", "0.7"}}, cfg_path.string());
  CHECK(cfg.gamma == 0.7);   // CLI wins
  CHECK(cfg.iters == 7);     // file beats the preset default
  CHECK(cfg.particles == 200);  // preset default survives
}

TEST_CASE("preset runs are reproducible and the resolved config round-trips") {
  TempDir a("run_a"), b("run_b"), c("run_c");
  std::map<std::string, std::string> overrides{
      {"preset", "fig3-1d-mixture"}, {"iters", "6"}, {"particles", "24"},
      {"mirror_iters", "8"},         {"seed", "5"},
  };

  auto run_into = [&](const fs::path& dir, std::map<std::string, std::string> extra,
                      const std::optional<std::string>& file) {
    extra.insert(overrides.begin(), overrides.end());
    extra["out"] = dir.string();
    svgd::RunConfig cfg = svgd::parse_config(extra, file);
    REQUIRE(svgd::run_preset(cfg) == 0);
  };

  run_into(a.path, {}, {});
  run_into(b.path, {}, {});
  CHECK(slurp(a.path / "particles.csv") == slurp(b.path / "particles.csv"));
  CHECK(strip_wall_ms(a.path / "trajectory.csv") == strip_wall_ms(b.path / "trajectory.csv"));

  // Rerunning from the echoed config reproduces the run.
  svgd::RunConfig from_file = svgd::parse_config({{"out", c.path.string()}},
                                                 (a.path / "config.resolved.json").string());
  REQUIRE(svgd::run_preset(from_file) == 0);
  CHECK(slurp(a.path / "particles.csv") == slurp(c.path / "particles.csv"));
  CHECK(strip_wall_ms(a.path / "trajectory.csv") == strip_wall_ms(c.path / "trajectory.csv"));
}

TEST_CASE("flow preset writes the report with a constant bound column") {
  TempDir tmp("flow");
  svgd::RunConfig cfg = svgd::parse_config(
      {{"preset", "flow-thm31"}, {"grid_cells", "128"}, {"horizon", "2"}, {"dt0", "0.25"},
       {"out", tmp.path.string()}},
      {});
  REQUIRE(svgd::run_preset(cfg) == 0);
  std::ifstream in(tmp.path / "flow.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,renyi,stein_fisher,identity_residual,avg_stein_fisher,bound");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    auto pos = line.rfind(',');
    CHECK(line.substr(pos + 1) == "2");  // -1/(T beta (beta+1)) = 4/T with T = 2
    ++rows;
  }
  CHECK(rows == 9);  // t = 0, 0.25, ..., 2
}

TEST_CASE("lemma preset emits the battery summary") {
  TempDir tmp("lemma");
  svgd::RunConfig cfg = svgd::parse_config(
      {{"preset", "check-lemma"}, {"lemma_trials", "50"}, {"out", tmp.path.string()}}, {});
  REQUIRE(svgd::run_preset(cfg) == 0);
  std::string csv = slurp(tmp.path / "lemma.csv");
  CHECK(csv.find("metric,value") == 0);
  CHECK(csv.find("lower_failures,0") != std::string::npos);
}

TEST_CASE("logreg preset appends the holdout accuracy column") {
  TempDir tmp("logreg");
  svgd::RunConfig cfg = svgd::parse_config(
      {{"preset", "logreg-synthetic"}, {"data_size", "200"}, {"data_dim", "4"},
       {"particles", "20"}, {"iters", "20"}, {"record_every", "5"}, {"batch", "32"},
       {"out", tmp.path.string()}},
      {});
  REQUIRE(svgd::run_preset(cfg) == 0);
  std::ifstream in(tmp.path / "trajectory.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header.find(",accuracy") == header.size() - 9);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    double acc = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
    ++rows;
  }
  CHECK(rows == 5);  // iters 0, 5, 10, 15 plus the final state at 20
}

TEST_CASE("command line binary surfaces config errors") {
  const char* bin = std::getenv("SVGDKIT_BIN");
  if (!bin || !*bin) {
    MESSAGE("SVGDKIT_BIN not set; skipping binary-level checks");
    return;
  }
  TempDir tmp("cli");
  std::string cmd = std::string(bin) + " sample --preset fig3-1d-mixture --beta -1.5 --out " +
                    (tmp.path / "x").string() + " 2> " + (tmp.path / "err.txt").string();
  int status = std::system(cmd.c_str());
  CHECK(status != 0);
  CHECK(slurp(tmp.path / "err.txt").find("beta must exceed -1") != std::string::npos);

  // weights subcommand end to end
  Eigen::MatrixXd pts(3, 2);
  pts << 0.1, 0.2, -0.5, 1.0, 0.7, -0.3;
  svgd::write_particles_csv((tmp.path / "pts.csv").string(), pts);
  cmd = std::string(bin) + " weights --particles-csv " + (tmp.path / "pts.csv").string() +
        " --out " + tmp.path.string() + " --mirror-iters 50";
  status = std::system(cmd.c_str());
  CHECK(status == 0);
  std::string weights = slurp(tmp.path / "weights.txt");
  CHECK(weights.find("objective ") != std::string::npos);
}
