#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "wave_apost/errors.hpp"
#include "wave_apost/experiment.hpp"

using namespace wave_apost;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wave_apost_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(WAVE_APOST_EXE) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (header) *header = line;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST(Config, ParsesKeysAndComments) {
  const AppConfig c = parse_config(
      "# comment\n"
      "H = 0.15\n"
      "cfl=0.5   # trailing\n"
      "mass = consistent\n"
      "mesh = fixed_window\n"
      "window_lo = -1\n"
      "window_hi = 2\n"
      "time_indicator = printed\n"
      "h_list = 0.3, 0.15\n"
      "problem = zero\n"
      "check_stability = false\n"
      "out = results\n");
  EXPECT_DOUBLE_EQ(c.run.H, 0.15);
  EXPECT_DOUBLE_EQ(c.run.cfl, 0.5);
  EXPECT_EQ(c.run.mass, MassMode::consistent);
  EXPECT_EQ(c.run.mesh_mode, MeshMode::fixed_window);
  EXPECT_DOUBLE_EQ(c.run.window0.lo, -1.0);
  EXPECT_DOUBLE_EQ(c.run.window0.hi, 2.0);
  EXPECT_EQ(c.estimator.time_form, TimeIndicatorForm::printed);
  EXPECT_EQ(c.h_list, (std::vector<double>{0.3, 0.15}));
  EXPECT_EQ(c.problem, "zero");
  EXPECT_FALSE(c.run.check_stability);
  EXPECT_EQ(c.out_dir, fs::path("results"));
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("H = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("H 0.3\n"), ConfigError);
  EXPECT_THROW(parse_config("mass = heavy\n"), ConfigError);
  EXPECT_THROW(parse_config("degree = 1.5\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/wave.cfg"), ConfigError);
}

TEST(Format, SeventeenDigits) {
  EXPECT_EQ(fmt(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(fmt(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Slope, ExactPowerLaw) {
  const std::vector<double> h{0.4, 0.2, 0.1, 0.05};
  std::vector<double> y;
  for (double x : h) y.push_back(3.0 * x * x);
  EXPECT_NEAR(fit_slope(h, y), 2.0, 1e-12);
  EXPECT_THROW(fit_slope({1.0}, {1.0}), ConfigError);
}

TEST(Cli, RunWritesOutputs) {
  const fs::path dir = scratch("run");
  ASSERT_EQ(run_cli("run --out " + dir.string(), dir / "log.txt"), 0) << slurp(dir / "log.txt");
  std::string header;
  const auto ind = read_csv(dir / "indicators.csv", &header);
  EXPECT_EQ(header, "# n,t,eps0,eps1,theta0_mean,theta1_mean,alpha,mu0,mu1,mu2,delta_mean,eta");
  ASSERT_FALSE(ind.empty());
  for (const auto& r : ind) EXPECT_EQ(r.size(), 12u);
  EXPECT_DOUBLE_EQ(ind.back()[1], 1.0);
  read_csv(dir / "mesh.csv", &header);
  EXPECT_EQ(header, "# n,t,x");
  read_csv(dir / "solution.csv", &header);
  EXPECT_EQ(header, "# t,x,U");
}

TEST(Cli, PulseTravelsToTwo) {
  const fs::path dir = scratch("peak");
  ASSERT_EQ(run_cli("run --H 0.075 --out " + dir.string(), dir / "log.txt"), 0);
  const auto sol = read_csv(dir / "solution.csv");
  double best = -1.0, where = 0.0, first_x = 1e9, last_x = -1e9;
  for (const auto& r : sol) {
    if (r[0] != 1.0) continue;
    first_x = std::min(first_x, r[1]);
    last_x = std::max(last_x, r[1]);
    if (r[2] > best) {
      best = r[2];
      where = r[1];
    }
  }
  EXPECT_NEAR(where, 2.0, 0.075);
  EXPECT_NEAR(best, 1.0, 0.05);
  EXPECT_EQ(first_x, -10.0);
  EXPECT_EQ(last_x, 10.0);
}

TEST(Cli, Deterministic) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ASSERT_EQ(run_cli("run --out " + a.string(), a / "log.txt"), 0);
  ASSERT_EQ(run_cli("run --out " + b.string(), b / "log.txt"), 0);
  for (const char* f : {"indicators.csv", "mesh.csv", "solution.csv", "summary.csv"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Cli, ZeroProblemGivesZeroIndicators) {
  const fs::path dir = scratch("zero");
  write(dir / "zero.cfg", "problem = zero\n");
  ASSERT_EQ(run_cli("run --config " + (dir / "zero.cfg").string() + " --out " + dir.string(), dir / "log.txt"), 0);
  for (const auto& r : read_csv(dir / "indicators.csv"))
    for (std::size_t i = 2; i < r.size(); ++i) EXPECT_EQ(r[i], 0.0);
}

TEST(Cli, OverridesBeatConfig) {
  const fs::path dir = scratch("override");
  write(dir / "c.cfg", "H = 0.3\nT = 0.5\n");
  ASSERT_EQ(run_cli("run --config " + (dir / "c.cfg").string() + " --T 0.25 --out " + dir.string(), dir / "log.txt"), 0);
  const auto ind = read_csv(dir / "indicators.csv");
  EXPECT_DOUBLE_EQ(ind.back()[1], 0.25);
}

TEST(Cli, Convergence) {
  const fs::path dir = scratch("conv");
  write(dir / "c.cfg", "h_list = 0.3, 0.15\n");
  ASSERT_EQ(run_cli("convergence --config " + (dir / "c.cfg").string() + " --out " + dir.string(), dir / "log.txt"), 0);
  std::string header;
  const auto rows = read_csv(dir / "convergence.csv", &header);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(header.rfind("# H,", 0), 0u);
  EXPECT_LT(rows[1][3], rows[0][3]);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("codes");
  write(dir / "bad.cfg", "nonsense = 3\n");
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.cfg").string() + " --out " + dir.string(), dir / "log.txt"), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "missing.cfg").string(), dir / "log.txt"), 2);
  EXPECT_EQ(run_cli("run --H -1 --out " + dir.string(), dir / "log.txt"), 2);
  EXPECT_EQ(run_cli("frobnicate", dir / "log.txt"), 2);
  // uniform H/2 mesh with tau = 0.52 H exactly: the stability check aborts
  write(dir / "unstable.cfg", "mesh = uniform_fine\nsteps = 10\nT = " + fmt(10 * 0.52 * 20.0 / 67.0) + "\n");
  EXPECT_EQ(run_cli("run --config " + (dir / "unstable.cfg").string() + " --out " + dir.string(), dir / "log.txt"), 3);
  EXPECT_NE(slurp(dir / "log.txt").find("unstable"), std::string::npos);
}

TEST(Cli, VerifyAndMutations) {
  const fs::path dir = scratch("verify");
  EXPECT_EQ(run_cli("verify", dir / "ok.txt"), 0) << slurp(dir / "ok.txt");
  EXPECT_EQ(slurp(dir / "ok.txt").find("FAIL"), std::string::npos);
  EXPECT_EQ(run_cli("verify --mutate flip_bubble_sign", dir / "flip.txt"), 1);
  EXPECT_NE(slurp(dir / "flip.txt").find("FAIL quadratic time-reconstruction residual"), std::string::npos);
  EXPECT_EQ(run_cli("verify --mutate wrong_lumping", dir / "lump.txt"), 1);
  EXPECT_NE(slurp(dir / "lump.txt").find("FAIL energy drift"), std::string::npos);
}
