#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wave_apost/fespace.hpp"
#include "wave_apost/mesh.hpp"
#include "wave_apost/timegrid.hpp"

namespace wave_apost {

/// Initial data, load and (optionally) the exact solution.
struct Problem {
  SpaceFn u0;
  SpaceFn v0;
  SpaceTimeFn f;  // empty: f = 0
  bool f_continuous = true;
  SpaceTimeFn u;
  SpaceTimeFn v;
  SpaceTimeFn u_x;

  bool has_exact() const { return u && v && u_x; }
};

enum class MeshMode { moving_window, fixed_window, uniform_coarse, uniform_fine };

struct RunConfig {
  double a = -10.0;
  double b = 10.0;
  double H = 0.3;
  double cfl = 0.52;
  double T = 1.0;
  Interval window0{-1.9, 3.9};
  double theta = 0.75;
  MassMode mass = MassMode::lumped;
  int degree = 1;
  double wave_speed = 1.0;
  MeshMode mesh_mode = MeshMode::moving_window;
  /// Negative: N = ceil(T / (cfl * H)).
  int steps = -1;
  bool check_stability = true;
  /// Record n = -1 and n = N+1, N+2 for the estimator layer.
  bool ghost_steps = true;
};

SpaceOptions space_options(const RunConfig& cfg);

/// Decides the mesh of every step.
class MeshSchedule {
 public:
  explicit MeshSchedule(const RunConfig& cfg);

  int macro_count() const { return macro_count_; }
  double macro_h() const { return (cfg_.b - cfg_.a) / macro_count_; }
  const Mesh1D& initial() const { return initial_; }
  /// Mesh for step n+1 given the mesh of step n; t_next = t_{n+1}.
  Mesh1D next(const Mesh1D& current, double t_next);

 private:
  Mesh1D window_mesh(double shift) const;

  RunConfig cfg_;
  int macro_count_;
  Mesh1D initial_;
  double t_last_ = 0.0;
};

TimeGrid make_grid(const RunConfig& cfg, double macro_h);

struct WaveState {
  int n = 0;
  DiscreteField U;  // at t_n
  DiscreteField V;  // at t_{n-1/2}
  const SpacePtr& space() const { return U.space; }
};

struct Trajectory {
  TimeGrid grid{1.0, 1};
  int first_index = 0;
  std::vector<WaveState> states;
  std::vector<DiscreteField> sources;
  std::vector<int> mesh_change_steps;
  std::vector<std::string> warnings;

  int steps() const { return grid.steps(); }
  int last_index() const { return first_index + static_cast<int>(states.size()) - 1; }
  bool has(int n) const { return n >= first_index && n <= last_index(); }
  const WaveState& state(int n) const;
  const DiscreteField& source(int n) const;
  const SpacePtr& space(int n) const { return state(n).space(); }
};

/// U^0 = P u0, V^{-1/2} = P v0 - (F^0 - Ã U^0) tau / 2.
WaveState initialize(const SpacePtr& space0, const Problem& problem, const DiscreteField& F0,
                     double tau);

/// V^{n+1/2} = Pi[V^{n-1/2} + (F^n - Ã U^n) tau], U^{n+1} = Pi U^n + tau V^{n+1/2}.
WaveState step(const WaveState& state, const SpacePtr& next_space, const DiscreteField& F_n,
               double tau);

Trajectory run(const RunConfig& cfg, const Problem& problem);

struct PowerResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// tau_max = 2 / sqrt(lambda_max) for K x = lambda M x (configured mass).
double cfl_estimate(const FeSpace& space);
PowerResult max_generalized_eigenvalue(const FeSpace& space, double tol = 1e-6,
                                       int max_iter = 10000);

struct StabilityReport {
  double mu_min = 0.0;
  double mu_max = 0.0;
  double spectral_radius = 1.0;
  bool stable = true;
};

/// Extreme eigenvalues of tau^2 Ã and the spectral radius of the leapfrog map.
StabilityReport lts_stability(const FeSpace& space, double tau);

/// Two-step leapfrog U^{n+1} = 2U^n - U^{n-1} + tau^2 (F^n - Ã U^n) on one space,
/// started with U^1 = U^0 + tau P v0 + tau^2/2 (F^0 - Ã U^0). Returns U^0..U^steps.
std::vector<Vec> two_step_run(const SpacePtr& space, const Vec& U0, const Vec& Pv0,
                              const std::function<Vec(int)>& F, double tau, int steps);

/// U^{n+1} from two explicit tau/2 substeps on the fine dofs.
DiscreteField lts_substep_update(const DiscreteField& U, const DiscreteField& U_prev,
                                 const DiscreteField& F, double tau);

/// 1/2 |(U^{n+1} - U^n)/tau|_M^2 + 1/2 a(U^n, U^{n+1}) in the given mass mode.
double shadow_energy(const DiscreteField& U_n, const DiscreteField& U_next, double tau,
                     std::optional<MassMode> mass = std::nullopt);

/// 1/2 (|U|_a^2 + |V|_{L2}^2).
double discrete_energy(const WaveState& state);

}  // namespace wave_apost
