#include "wave_apost/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "wave_apost/errors.hpp"

namespace wave_apost {

SpaceOptions space_options(const RunConfig& cfg) {
  SpaceOptions o;
  o.mass = cfg.mass;
  o.theta = cfg.theta;
  o.degree = cfg.degree;
  o.wave_speed = {cfg.wave_speed};
  return o;
}

namespace {

int macro_count_of(const RunConfig& cfg) {
  if (!(cfg.b > cfg.a)) throw ConfigError("domain needs a < b");
  if (!(cfg.H > 0.0) || !std::isfinite(cfg.H)) throw ConfigError("H must be positive");
  const auto count = static_cast<int>(std::lround((cfg.b - cfg.a) / cfg.H));
  if (count < 1) throw ConfigError("H larger than the domain");
  return count;
}

Interval clip(Interval w, double a, double b) {
  return {std::max(w.lo, a), std::min(w.hi, b)};
}

}  // namespace

MeshSchedule::MeshSchedule(const RunConfig& cfg)
    : cfg_(cfg), macro_count_(macro_count_of(cfg)), initial_(build_uniform(cfg.a, cfg.b, cfg.H)) {
  if (cfg.mesh_mode == MeshMode::moving_window || cfg.mesh_mode == MeshMode::fixed_window) {
    const Interval w = cfg.window0;
    if (!w.empty() && (w.lo < cfg.a || w.hi > cfg.b)) {
      throw ConfigError("initial window must lie inside the domain");
    }
  }
  initial_ = window_mesh(0.0);
}

Mesh1D MeshSchedule::window_mesh(double shift) const {
  switch (cfg_.mesh_mode) {
    case MeshMode::uniform_coarse:
      return build_window_mesh(cfg_.a, cfg_.b, macro_count_, Interval{});
    case MeshMode::uniform_fine:
      return build_window_mesh(cfg_.a, cfg_.b, macro_count_, Interval{cfg_.a, cfg_.b});
    case MeshMode::fixed_window:
      return build_window_mesh(cfg_.a, cfg_.b, macro_count_, cfg_.window0);
    case MeshMode::moving_window:
      break;
  }
  Interval w{cfg_.window0.lo + shift, cfg_.window0.hi + shift};
  return build_window_mesh(cfg_.a, cfg_.b, macro_count_, clip(w, cfg_.a, cfg_.b));
}

Mesh1D MeshSchedule::next(const Mesh1D& current, double t_next) {
  if (cfg_.mesh_mode != MeshMode::moving_window) return current;
  if (t_next - t_last_ > macro_h()) {
    t_last_ = t_next;
    return advance_window(current, clip({cfg_.window0.lo + t_next, cfg_.window0.hi + t_next},
                                        cfg_.a, cfg_.b));
  }
  return current;
}

TimeGrid make_grid(const RunConfig& cfg, double macro_h) {
  if (!(cfg.cfl > 0.0) || !std::isfinite(cfg.cfl)) throw ConfigError("cfl factor must be positive");
  if (cfg.steps == 0) return TimeGrid::initial_only(cfg.cfl * macro_h);
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) throw ConfigError("final time must be positive");
  int n = cfg.steps;
  if (n < 0) n = static_cast<int>(std::ceil(cfg.T / (cfg.cfl * macro_h) - 1e-12));
  return TimeGrid(cfg.T, std::max(n, 1));
}

const WaveState& Trajectory::state(int n) const {
  if (!has(n)) throw IndexError("trajectory has no state " + std::to_string(n));
  return states[static_cast<std::size_t>(n - first_index)];
}

const DiscreteField& Trajectory::source(int n) const {
  if (!has(n)) throw IndexError("trajectory has no source " + std::to_string(n));
  return sources[static_cast<std::size_t>(n - first_index)];
}

WaveState initialize(const SpacePtr& space0, const Problem& problem, const DiscreteField& F0,
                     double tau) {
  DiscreteField U = problem.u0 ? l2_project(space0, problem.u0) : DiscreteField::zero(space0);
  DiscreteField Pv = problem.v0 ? l2_project(space0, problem.v0) : DiscreteField::zero(space0);
  DiscreteField AU = lts_operator_apply(U, tau);
  DiscreteField V{space0, Pv.coeffs - 0.5 * tau * (F0.coeffs - AU.coeffs)};
  return {0, std::move(U), std::move(V)};
}

WaveState step(const WaveState& state, const SpacePtr& next_space, const DiscreteField& F_n,
               double tau) {
  const SpacePtr& sp = state.space();
  if (!sp->mesh().compatible_with(next_space->mesh())) {
    throw IncompatibleMeshError("next space is not compatible with the current one");
  }
  const DiscreteField AU = lts_operator_apply(state.U, tau);
  DiscreteField Vtmp{sp, state.V.coeffs + tau * (F_n.coeffs - AU.coeffs)};
  DiscreteField V = pass_operator(Vtmp, next_space);
  DiscreteField U = pass_operator(state.U, next_space);
  U.coeffs += tau * V.coeffs;
  if (!U.coeffs.allFinite() || !V.coeffs.allFinite()) {
    throw NumericalError("solution became non-finite at step " + std::to_string(state.n + 1));
  }
  return {state.n + 1, std::move(U), std::move(V)};
}

namespace {

template <class Apply>
PowerResult power_iteration(const FeSpace& space, Apply&& apply, Vec x, double tol, int max_iter) {
  PowerResult res;
  if (space.dim() == 0) {
    res.converged = true;
    return res;
  }
  auto mnorm = [&](const Vec& v) { return std::sqrt(std::max(0.0, v.dot(space.mass_apply(v)))); };
  x /= mnorm(x);
  double prev = 0.0;
  for (int k = 1; k <= max_iter; ++k) {
    Vec y = apply(x);
    const double lambda = x.dot(space.mass_apply(y));
    res.value = lambda;
    res.iterations = k;
    const double ny = mnorm(y);
    if (ny == 0.0) {
      res.converged = true;
      return res;
    }
    if (k > 1 && std::abs(lambda - prev) <= tol * std::abs(lambda)) {
      res.converged = true;
      return res;
    }
    prev = lambda;
    x = y / ny;
  }
  return res;
}

Vec oscillating_start(Eigen::Index n) {
  Vec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = ((i % 2) ? -1.0 : 1.0) * (1.0 + 0.1 * std::sin(0.7 * i));
  return x;
}

Vec smooth_start(Eigen::Index n) {
  Vec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * std::cos(0.3 * i);
  return x;
}

double leapfrog_radius(double mu) {
  if (mu >= 0.0 && mu <= 4.0) return 1.0;
  const double s = 0.5 * (2.0 - mu);
  return std::abs(s) + std::sqrt(s * s - 1.0);
}

}  // namespace

PowerResult max_generalized_eigenvalue(const FeSpace& space, double tol, int max_iter) {
  return power_iteration(
      space, [&](const Vec& x) { return space.mass_solve(space.ops().stiffness.apply(x)); },
      oscillating_start(space.dim()), tol, max_iter);
}

double cfl_estimate(const FeSpace& space) {
  const PowerResult r = max_generalized_eigenvalue(space);
  if (!r.converged) throw NumericalError("power iteration did not converge");
  if (!(r.value > 0.0)) throw NumericalError("stiffness has no positive eigenvalue");
  return 2.0 / std::sqrt(r.value);
}

StabilityReport lts_stability(const FeSpace& space, double tau) {
  StabilityReport rep;
  if (space.dim() == 0) return rep;
  auto spc = FeSpace::create(space.mesh(), space.options());
  auto B = [&](const Vec& x) {
    return Vec(tau * tau * lts_operator_apply(DiscreteField(spc, x), tau).coeffs);
  };
  const PowerResult top = power_iteration(space, B, oscillating_start(space.dim()), 1e-6, 10000);
  rep.mu_max = top.value;
  const double shift = std::max(top.value, 0.0);
  const PowerResult low = power_iteration(
      space, [&](const Vec& x) { return Vec(shift * x - B(x)); }, smooth_start(space.dim()), 1e-6,
      10000);
  rep.mu_min = shift - low.value;
  rep.spectral_radius = std::max(leapfrog_radius(rep.mu_min), leapfrog_radius(rep.mu_max));
  rep.stable = rep.spectral_radius <= 1.0 + 1e-8;
  return rep;
}

namespace {

// Level pattern between the first and last refined element; translated
// windows share it and hence (up to boundary effects) their spectrum.
std::string stability_signature(const Mesh1D& mesh) {
  std::string sig = std::to_string(mesh.num_elements()) + ":";
  std::size_t first = mesh.num_elements();
  std::size_t last = 0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    if (mesh.level(e) > 0) {
      first = std::min(first, e);
      last = e;
    }
  }
  if (first == mesh.num_elements()) return sig + "uniform";
  for (std::size_t e = first; e <= last; ++e) sig += static_cast<char>('0' + mesh.level(e));
  if (first == 0 || last + 1 == mesh.num_elements()) sig += ":edge";
  return sig;
}

}  // namespace

Trajectory run(const RunConfig& cfg, const Problem& problem) {
  if (cfg.degree != 1) throw ConfigError("only degree 1 elements are available");
  if (!(cfg.theta > 0.0 && cfg.theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  if (!(cfg.wave_speed > 0.0)) throw ConfigError("wave speed must be positive");
  MeshSchedule schedule(cfg);
  const SpaceOptions opts = space_options(cfg);
  Trajectory traj;
  traj.grid = make_grid(cfg, schedule.macro_h());
  const TimeGrid& grid = traj.grid;
  const double tau = grid.tau();
  const int N = grid.steps();

  std::map<std::string, StabilityReport> checked;
  auto check = [&](const SpacePtr& sp, int n) {
    if (!cfg.check_stability) return;
    const std::string sig = stability_signature(sp->mesh());
    auto it = checked.find(sig);
    if (it == checked.end()) it = checked.emplace(sig, lts_stability(*sp, tau)).first;
    if (!it->second.stable) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "unstable time step at n=%d: tau=%.6g, eigenvalues of tau^2 A in [%.6g, %.6g], "
                    "spectral radius %.10g",
                    n, tau, it->second.mu_min, it->second.mu_max, it->second.spectral_radius);
      throw NumericalError(buf);
    }
  };

  {
    const SpacePtr coarse = FeSpace::create(build_uniform(cfg.a, cfg.b, schedule.macro_h()), opts);
    const PowerResult r = max_generalized_eigenvalue(*coarse);
    if (r.value > 0.0 && tau > 2.0 / std::sqrt(r.value)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "tau=%.6g exceeds the coarse-mesh CFL limit %.6g", tau,
                    2.0 / std::sqrt(r.value));
      traj.warnings.emplace_back(buf);
    }
  }

  SpacePtr space = FeSpace::create(schedule.initial(), opts);
  check(space, 0);
  DiscreteField F0 = source_approx(space, problem.f, 0.0, tau, problem.f_continuous);
  WaveState s0 = initialize(space, problem, F0, tau);

  const int last = cfg.ghost_steps ? N + 2 : N;
  traj.first_index = cfg.ghost_steps ? -1 : 0;
  if (cfg.ghost_steps) {
    WaveState g{-1, DiscreteField(space, s0.U.coeffs - tau * s0.V.coeffs), DiscreteField(space)};
    DiscreteField Fm = source_approx(space, problem.f, -tau, tau, problem.f_continuous);
    g.V.coeffs = s0.V.coeffs - tau * (Fm.coeffs - lts_operator_apply(g.U, tau).coeffs);
    traj.states.push_back(std::move(g));
    traj.sources.push_back(std::move(Fm));
  }
  traj.states.push_back(std::move(s0));
  traj.sources.push_back(std::move(F0));

  Mesh1D mesh = schedule.initial();
  for (int n = 0; n < last; ++n) {
    const double t_next = grid.node_unchecked(HalfIndex::integer(n + 1));
    Mesh1D next = schedule.next(mesh, t_next);
    SpacePtr next_space = space;
    if (!(next == mesh)) {
      next_space = FeSpace::create(next, opts);
      traj.mesh_change_steps.push_back(n + 1);
      check(next_space, n + 1);
      mesh = std::move(next);
    }
    WaveState s = step(traj.states.back(), next_space, traj.sources.back(), tau);
    space = next_space;
    traj.sources.push_back(source_approx(space, problem.f, t_next, tau, problem.f_continuous));
    traj.states.push_back(std::move(s));
  }
  return traj;
}

std::vector<Vec> two_step_run(const SpacePtr& space, const Vec& U0, const Vec& Pv0,
                              const std::function<Vec(int)>& F, double tau, int steps) {
  auto At = [&](const Vec& x) { return lts_operator_apply(DiscreteField(space, x), tau).coeffs; };
  std::vector<Vec> U;
  U.push_back(U0);
  if (steps == 0) return U;
  U.push_back(U0 + tau * Pv0 + 0.5 * tau * tau * (F(0) - At(U0)));
  for (int n = 1; n < steps; ++n) {
    const Vec& un = U[static_cast<std::size_t>(n)];
    U.push_back(2.0 * un - U[static_cast<std::size_t>(n) - 1] + tau * tau * (F(n) - At(un)));
  }
  return U;
}

DiscreteField lts_substep_update(const DiscreteField& U, const DiscreteField& U_prev,
                                 const DiscreteField& F, double tau) {
  const FeSpace& sp = *U.space;
  auto A = [&](const Vec& x) { return Vec(sp.mass_solve(sp.ops().stiffness.apply(x))); };
  const Vec PU = fine_interpolator(U).coeffs;
  const Vec coarse_force = F.coeffs - A(U.coeffs - PU);
  const Vec w1 = U.coeffs + (tau * tau / 8.0) * (F.coeffs - A(U.coeffs));
  const Vec Pw1 = fine_interpolator(DiscreteField(U.space, w1)).coeffs;
  const Vec w2 = 2.0 * w1 - U.coeffs + 0.25 * tau * tau * (coarse_force - A(Pw1));
  return {U.space, 2.0 * w2 - U_prev.coeffs};
}

double shadow_energy(const DiscreteField& U_n, const DiscreteField& U_next, double tau,
                     std::optional<MassMode> mass) {
  const FeSpace& sp = *U_n.space;
  const Vec d = (U_next.coeffs - U_n.coeffs) / tau;
  const MassMode mode = mass.value_or(sp.mass_mode());
  const double kinetic = mode == MassMode::lumped ? d.dot(sp.ops().mass_lumped.cwiseProduct(d))
                                                  : d.dot(sp.ops().mass_consistent.apply(d));
  return 0.5 * kinetic + 0.5 * U_n.coeffs.dot(sp.ops().stiffness.apply(U_next.coeffs));
}

double discrete_energy(const WaveState& state) {
  const double p = potential_norm(state.U);
  const double k = pivot_norm(state.V);
  return 0.5 * (p * p + k * k);
}

}  // namespace wave_apost
