#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wave_apost/estimators.hpp"
#include "wave_apost/stepper.hpp"

namespace wave_apost {

struct AppConfig {
  RunConfig run;
  EstimatorOptions estimator;
  std::string problem = "gaussian_pulse";
  std::vector<double> h_list{0.3, 0.15, 0.075, 0.0375};
  std::filesystem::path out_dir = "out";
};

/// Flat `key = value` lines, `#` starts a comment. Throws ConfigError.
AppConfig parse_config(const std::string& text, AppConfig base = {});
AppConfig load_config(const std::filesystem::path& file, AppConfig base = {});

/// gaussian_pulse: u = exp(-4 (x - 1 - c t)^2); zero: everything 0.
Problem make_problem(const std::string& name, double wave_speed = 1.0);

/// 17 significant digits.
std::string fmt(double x);

struct RunOutcome {
  Trajectory trajectory;
  EstimateReport report;
};

RunOutcome execute(const AppConfig& cfg);

void write_indicators_csv(const std::filesystem::path& file, const RunOutcome& out);
void write_mesh_csv(const std::filesystem::path& file, const Trajectory& traj);
void write_solution_csv(const std::filesystem::path& file, const Trajectory& traj);
void write_summary_csv(const std::filesystem::path& file, const RunOutcome& out);

struct ConvergenceRow {
  double H = 0.0;
  double tau = 0.0;
  int steps = 0;
  double rel_energy_error = 0.0;
  double l2_error = 0.0;
  double bound_U = 0.0;
  double bound_V = 0.0;
  double true_error_U = 0.0;
  double true_error_V = 0.0;
  double eta_total = 0.0;
  double initial_error = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  double slope_energy = 0.0;
  double slope_l2 = 0.0;
  double slope_bound_U = 0.0;
  double slope_bound_V = 0.0;
};

/// Least-squares slope of log y against log x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

/// One run per H, executed concurrently.
ConvergenceResult convergence_study(const AppConfig& cfg, const std::vector<double>& h_list);
void write_convergence_csv(const std::filesystem::path& dir, const ConvergenceResult& res);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyMutations {
  bool flip_bubble_sign = false;
  bool wrong_lumping = false;
};

/// max |U_system - U_two_step| over `steps` steps on a fixed window mesh.
double scheme_form_difference(int steps);
/// Relative difference of the Ã update and two tau/2 substeps, all dofs fine.
double lts_substep_difference();
/// Relative shadow-energy drift on a fixed uniform mesh, lumped scheme; the
/// energy is measured with `energy_mass` when given.
double energy_drift(int steps, std::optional<MassMode> energy_mass = std::nullopt);

struct BrSpotCheck {
  double reconstruction_error = 0.0;
  double estimator = 0.0;
};
std::vector<BrSpotCheck> br_reliability(int count, int ref_refine, unsigned seed = 7);

struct StabilityDemo {
  double fine_growth = 0.0;  // max E_n / E_0 of the uniform-fine run
  int fine_steps = 0;
  double lts_growth = 0.0;   // max E_n / E_0 of the window run over [0, T]
  bool fine_flagged_unstable = false;
};
StabilityDemo stability_demo(double H = 0.3, double cfl = 0.52, int blowup_steps = 200);

std::vector<CheckResult> run_verification(const VerifyMutations& mutations = {});

int cmd_run(const AppConfig& cfg, std::ostream& log);
int cmd_convergence(const AppConfig& cfg, std::ostream& log);
int cmd_verify(const VerifyMutations& mutations, std::ostream& log);

}  // namespace wave_apost
