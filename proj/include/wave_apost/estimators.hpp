#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wave_apost/fespace.hpp"
#include "wave_apost/stepper.hpp"
#include "wave_apost/timegrid.hpp"

namespace wave_apost {

/// Target norm of the residual estimator: energy (sigma = 1) or pivot (sigma = 2).
enum class BrNorm { energy = 1, pivot = 2 };

/// ||h^sigma A_V w||_{L2} + sqrt(sum_nodes h^{2 sigma - 1} [c^2 w']^2), the
/// sum running over interior nodes of w's mesh.
double br_estimator(const DiscreteField& w, const SpacePtr& eval_space, BrNorm flag);

/// Estimator functional relative to a target space (possibly an intersection space).
double estimator_functional(const DiscreteField& w, const SpacePtr& target_space, BrNorm flag);

/// Galerkin approximation of A^{-1} A_V phi on the mesh refined ref_refine times.
DiscreteField reference_reconstruction(const DiscreteField& phi, int ref_refine);

/// || R phi - phi ||_a with R from reference_reconstruction.
double reconstruction_error(const DiscreteField& phi, int ref_refine);

enum class TimeIndicatorForm { derived, printed };
enum class Mu0Space { printed, shifted };

struct EstimatorOptions {
  TimeIndicatorForm time_form = TimeIndicatorForm::derived;
  Mu0Space mu0_space = Mu0Space::printed;
};

/// Time-quadrature nodes per interval: 3 Gauss points on each half.
constexpr int kTimeNodes = 6;

struct IndicatorSample {
  int n = 0;
  double t = 0.0;
  double mu0 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double alpha = 0.0;
  double eps0 = 0.0;
  double eps1 = 0.0;
  /// theta0 on I_n = [t_{n-1}, t_n] (zero for n = 0).
  std::array<double, kTimeNodes> theta0_t{};
  std::array<double, kTimeNodes> theta0_quad{};
  /// theta1 and delta on [t_{n-1/2}, t_{n+1/2}].
  std::array<double, kTimeNodes> theta1_t{};
  std::array<double, kTimeNodes> theta1_quad{};
  std::array<double, kTimeNodes> delta_quad{};
  /// eta_{2n-1} + eta_{2n}: accumulation over I_n.
  double eta = 0.0;

  double theta0_mean() const;
  double theta1_mean() const;
  double delta_mean() const;
};

/// All indicators of step n; needs trajectory states n-2 .. n+2.
IndicatorSample indicators_at(const Trajectory& traj, int n, const Problem& problem,
                              const EstimatorOptions& opts = {});

struct Accumulation {
  /// eta_m for m = 1 .. 2N at index m - 1.
  std::vector<double> eta_m;
  double total = 0.0;
};

/// eta_m = integral over [t_{(m-1)/2}, t_{m/2}] of
/// sqrt((mu0^n + theta0^n)^2 + (alpha^k + mu1^k + delta^k + theta1^k)^2),
/// n = ceil(m/2), k = floor(m/2); 3-point Gauss per half interval.
Accumulation accumulate(const std::vector<IndicatorSample>& samples, const TimeGrid& grid);

struct EstimateReport {
  double bound_U = 0.0;
  double bound_V = 0.0;
  double initial_energy_error = 0.0;
  double max_eps0 = 0.0;
  double max_eps1 = 0.0;
  double eta_total = 0.0;
  double true_error_U = 0.0;
  double true_error_V = 0.0;
  double l2_error_U = 0.0;
  double relative_energy_error = 0.0;
  std::vector<IndicatorSample> samples;
  std::vector<double> eta_m;
};

EstimateReport total_bounds(const Trajectory& traj, const Problem& problem,
                            const EstimatorOptions& opts = {});

struct IdentityCheck {
  std::string name;
  bool passed = true;
  double max_residual = 0.0;
  std::string detail;
};

struct IdentityOptions {
  int trials = 100;
  int times_per_interval = 10;
  int intervals = 8;
  int dim = 4;
  std::uint64_t seed = 20240611;
  double tolerance = 1e-12;
  /// Replaceable bubble function (mutation testing).
  std::function<double(double, HalfIndex, double)> bubble = bubble_raw;
};

std::vector<IdentityCheck> verify_reconstruction_identities(const IdentityOptions& opts = {});

}  // namespace wave_apost
