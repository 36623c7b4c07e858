#include "wave_apost/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wave_apost/errors.hpp"
#include "wave_apost/quadrature.hpp"

namespace wave_apost {

namespace {

// Local mesh size of the evaluation mesh at a lattice key.
double local_size(const Mesh1D& mesh, std::int64_t key) {
  const auto& keys = mesh.keys();
  auto it = std::lower_bound(keys.begin(), keys.end(), key);
  if (it != keys.end() && *it == key) {
    const auto j = static_cast<std::size_t>(it - keys.begin());
    double h = 0.0;
    if (j > 0) h = std::max(h, mesh.width(j - 1));
    if (j + 1 < keys.size()) h = std::max(h, mesh.width(j));
    return h;
  }
  return mesh.width(mesh.element_of_key(key));
}

}  // namespace

double br_estimator(const DiscreteField& w, const SpacePtr& eval_space, BrNorm flag) {
  const Mesh1D& wm = w.space->mesh();
  const Mesh1D& vm = eval_space->mesh();
  if (!wm.compatible_with(vm)) throw IncompatibleMeshError("estimator on incompatible meshes");
  const int sigma = static_cast<int>(flag);

  // regular part: A_V w depends on w only through its interpolant on V
  const DiscreteField Iw = pass_operator(w, eval_space);
  const Vec Aw = eval_space->mass_solve(eval_space->ops().stiffness.apply(Iw.coeffs));
  double reg = 0.0;
  for (std::size_t e = 0; e < vm.num_elements(); ++e) {
    const double h = vm.width(e);
    const double l = eval_space->node_value(Aw, e);
    const double r = eval_space->node_value(Aw, e + 1);
    reg += std::pow(h, 2 * sigma) * h / 3.0 * (l * l + l * r + r * r);
  }

  double jump = 0.0;
  const FeSpace& ws = *w.space;
  for (std::size_t i = 1; i + 1 < wm.num_nodes(); ++i) {
    const double cl = ws.wave_speed(i - 1);
    const double cr = ws.wave_speed(i);
    const double J = cr * cr * ws.slope(w.coeffs, i) - cl * cl * ws.slope(w.coeffs, i - 1);
    if (J == 0.0) continue;
    const double h = local_size(vm, wm.keys()[i]);
    jump += std::pow(h, 2 * sigma - 1) * J * J;
  }
  return std::sqrt(reg) + std::sqrt(jump);
}

double estimator_functional(const DiscreteField& w, const SpacePtr& target_space, BrNorm flag) {
  return br_estimator(w, target_space, flag);
}

DiscreteField reference_reconstruction(const DiscreteField& phi, int ref_refine) {
  if (ref_refine < 0) throw ConfigError("reference refinement must be non-negative");
  const DiscreteField Aphi = discrete_elliptic_apply(phi);
  SpacePtr ref = phi.space->on_mesh(refine_uniformly(phi.space->mesh(), ref_refine));
  const DiscreteField Af = pass_operator(Aphi, ref);
  const Vec load = ref->ops().mass_consistent.apply(Af.coeffs);
  return {ref, ref->ops().stiffness.solve(load)};
}

double reconstruction_error(const DiscreteField& phi, int ref_refine) {
  const DiscreteField omega = reference_reconstruction(phi, ref_refine);
  const DiscreteField phi_ref = pass_operator(phi, omega.space);
  return potential_norm(omega - phi_ref);
}

double IndicatorSample::theta0_mean() const {
  return std::accumulate(theta0_quad.begin(), theta0_quad.end(), 0.0) / kTimeNodes;
}
double IndicatorSample::theta1_mean() const {
  return std::accumulate(theta1_quad.begin(), theta1_quad.end(), 0.0) / kTimeNodes;
}
double IndicatorSample::delta_mean() const {
  return std::accumulate(delta_quad.begin(), delta_quad.end(), 0.0) / kTimeNodes;
}

namespace {

struct Gram {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double norm(double a, double b) const {
    return std::sqrt(std::max(0.0, a * a * xx - 2.0 * a * b * xy + b * b * yy));
  }
};

template <class Product>
Gram gram(const DiscreteField& X, const DiscreteField& Y, Product&& prod) {
  return {prod(X, X), prod(X, Y), prod(Y, Y)};
}

// Six time nodes: 3 Gauss points on [lo, mid] then 3 on [mid, hi].
std::array<double, kTimeNodes> half_nodes(double lo, double mid, double hi) {
  const auto a = quad::mapped_nodes<3>(lo, mid);
  const auto b = quad::mapped_nodes<3>(mid, hi);
  return {a[0], a[1], a[2], b[0], b[1], b[2]};
}

}  // namespace

IndicatorSample indicators_at(const Trajectory& traj, int n, const Problem& problem,
                              const EstimatorOptions& opts) {
  const TimeGrid& grid = traj.grid;
  const double tau = grid.tau();
  const double tau2 = tau * tau;
  auto t_of = [&](int twice) { return grid.node_unchecked(HalfIndex{twice}); };

  IndicatorSample s;
  s.n = n;
  s.t = t_of(2 * n);

  const WaveState& Sn = traj.state(n);
  const SpacePtr& Vn = Sn.space();
  const SpacePtr& Vn1 = traj.space(n + 1);
  const bool change_next = Vn.get() != Vn1.get();
  const DiscreteField AtU = lts_operator_apply(Sn.U, tau);
  const DiscreteField AU = discrete_elliptic_apply(Sn.U);

  if (traj.has(n - 1) && traj.space(n - 1).get() != Vn.get()) {
    const DiscreteField& Up = traj.state(n - 1).U;
    const DiscreteField PU = pass_operator(Up, Vn);
    const DiscreteField w = combine({{1.0, &PU}, {-1.0, &Up}});
    const SpacePtr target = opts.mu0_space == Mu0Space::printed
                                ? intersection_space(Vn, Vn1)
                                : intersection_space(traj.space(n - 1), Vn);
    s.mu0 = (potential_norm(w) + estimator_functional(w, target, BrNorm::energy)) / tau;
  }
  if (change_next) {
    const DiscreteField PV = pass_operator(Sn.V, Vn1);
    const DiscreteField w1 = combine({{1.0, &PV}, {-1.0, &Sn.V}});
    s.mu1 = (pivot_norm(w1) + estimator_functional(w1, intersection_space(Vn, Vn1), BrNorm::pivot)) /
            tau;
    const DiscreteField PA = pass_operator(AtU, Vn1);
    const DiscreteField w2 = combine({{1.0, &AtU}, {-1.0, &PA}});
    s.mu2 = pivot_norm(w2) + estimator_functional(w2, Vn1, BrNorm::pivot);
  }
  s.alpha0 = pivot_norm(AU - AtU);
  s.alpha1 = estimator_functional(AtU, Vn1, BrNorm::pivot);
  s.alpha = s.alpha0 + s.alpha1 + s.mu2;
  s.eps0 = estimator_functional(Sn.U, Vn, BrNorm::energy);
  s.eps1 = estimator_functional(Sn.V, Vn, BrNorm::pivot);

  const bool derived = opts.time_form == TimeIndicatorForm::derived;
  auto AUk = [&](int k) { return discrete_elliptic_apply(traj.state(k).U); };
  auto AVk = [&](int k) { return discrete_elliptic_apply(traj.state(k).V); };

  // theta0 on I_n
  if (n >= 1) {
    const DiscreteField& Vp = traj.state(n + 1).V;
    const DiscreteField& Vc = Sn.V;
    const DiscreteField& Vm = traj.state(n - 1).V;
    const DiscreteField X = combine({{1.0 / tau2, &Vp}, {-2.0 / tau2, &Vc}, {1.0 / tau2, &Vm}});
    const DiscreteField A2 = AUk(n - 2);
    const DiscreteField A1 = AUk(n - 1);
    const DiscreteField A3 = AUk(n + 1);
    const DiscreteField Y1 = combine({{0.5 / tau, &AU}, {-0.5 / tau, &A2}});
    const DiscreteField Y2 = combine({{0.5 / tau, &A3}, {-0.5 / tau, &A1}});
    const Gram g1 = gram(X, Y1, a_product);
    const Gram g2 = gram(X, Y2, a_product);
    const SpacePtr target = intersection_space(intersection_space(traj.space(n - 1), Vn), Vn1);
    const double ex = estimator_functional(X, target, BrNorm::energy);
    s.theta0_t = half_nodes(t_of(2 * n - 2), t_of(2 * n - 1), t_of(2 * n));
    for (int q = 0; q < kTimeNodes; ++q) {
      const double t = s.theta0_t[q];
      const double a = derived ? 0.5 * (hat_basis_raw(tau, HalfIndex::staggered(n), t) - 1.0)
                               : 0.5 * (hat_basis_raw(tau, HalfIndex::integer(n), t) - 1.0);
      const bool first = q < 3;
      const double b = bubble_raw(tau, HalfIndex::integer(first ? n - 1 : n), t);
      const Gram& g = first ? g1 : g2;
      s.theta0_quad[q] = tau2 * (g.norm(a, b) + std::abs(a) * ex);
    }
  }

  // theta1 and delta on [t_{n-1/2}, t_{n+1/2}]
  {
    const DiscreteField A1 = AUk(n - 1);
    const DiscreteField A3 = AUk(n + 1);
    const DiscreteField X = combine({{1.0 / tau2, &A3}, {-2.0 / tau2, &AU}, {1.0 / tau2, &A1}});
    const DiscreteField B1 = AVk(n + 1);
    const DiscreteField Bm = AVk(n - 1);
    const DiscreteField B2 = AVk(n + 2);
    const DiscreteField B0 = AVk(n);
    const DiscreteField Y1 = combine({{0.5 / tau, &B1}, {-0.5 / tau, &Bm}});
    const DiscreteField Y2 = combine({{0.5 / tau, &B2}, {-0.5 / tau, &B0}});
    const Gram g1 = gram(X, Y1, pivot_product);
    const Gram g2 = gram(X, Y2, pivot_product);
    s.theta1_t = half_nodes(t_of(2 * n - 1), t_of(2 * n), t_of(2 * n + 1));
    const DiscreteField& F = traj.source(n);
    for (int q = 0; q < kTimeNodes; ++q) {
      const double t = s.theta1_t[q];
      const double l = hat_basis_raw(tau, HalfIndex::integer(n), t);
      const double a = derived ? 0.5 * (l - 1.0) : 0.5 * l;
      const bool first = q < 3;
      const double b = bubble_raw(tau, first ? HalfIndex::staggered(n) : HalfIndex::staggered(n + 1), t);
      s.theta1_quad[q] = tau2 * (first ? g1 : g2).norm(a, b);
      if (problem.f) {
        s.delta_quad[q] = pivot_error(F, [&](double x) { return problem.f(x, t); });
      }
    }
  }
  return s;
}

Accumulation accumulate(const std::vector<IndicatorSample>& samples, const TimeGrid& grid) {
  const int N = grid.steps();
  if (static_cast<int>(samples.size()) < N + 1) throw IndexError("accumulation needs samples 0..N");
  Accumulation acc;
  acc.eta_m.assign(static_cast<std::size_t>(2 * N), 0.0);
  const double half = 0.5 * grid.tau();
  const auto w = quad::mapped_weights<3>(0.0, half);
  for (int m = 1; m <= 2 * N; ++m) {
    const int n = (m + 1) / 2;
    const int k = m / 2;
    const IndicatorSample& sn = samples[static_cast<std::size_t>(n)];
    const IndicatorSample& sk = samples[static_cast<std::size_t>(k)];
    const bool odd = (m % 2) == 1;
    const int off0 = odd ? 0 : 3;
    const int off1 = odd ? 3 : 0;
    double eta = 0.0;
    for (int q = 0; q < 3; ++q) {
      const double first = sn.mu0 + sn.theta0_quad[off0 + q];
      const double second = sk.alpha + sk.mu1 + sk.delta_quad[off1 + q] + sk.theta1_quad[off1 + q];
      eta += w[q] * std::hypot(first, second);
    }
    acc.eta_m[static_cast<std::size_t>(m) - 1] = eta;
    acc.total += eta;
  }
  return acc;
}

EstimateReport total_bounds(const Trajectory& traj, const Problem& problem,
                            const EstimatorOptions& opts) {
  if (!problem.has_exact()) throw ConfigError("total bounds need the exact solution");
  if (traj.first_index > -1 || traj.last_index() < traj.steps() + 2) {
    throw ConfigError("estimators need the ghost steps -1, N+1, N+2");
  }
  const TimeGrid& grid = traj.grid;
  const int N = grid.steps();
  EstimateReport rep;
  rep.samples.reserve(static_cast<std::size_t>(N) + 1);
  for (int n = 0; n <= N; ++n) rep.samples.push_back(indicators_at(traj, n, problem, opts));
  const Accumulation acc = accumulate(rep.samples, grid);
  rep.eta_m = acc.eta_m;
  rep.eta_total = acc.total;
  for (int n = 1; n <= N; ++n) {
    rep.samples[static_cast<std::size_t>(n)].eta =
        acc.eta_m[static_cast<std::size_t>(2 * n - 2)] + acc.eta_m[static_cast<std::size_t>(2 * n - 1)];
  }

  const WaveState& s0 = traj.state(0);
  const double t_mh = grid.node(HalfIndex::staggered(0));
  rep.initial_energy_error =
      std::hypot(potential_error(s0.U, [&](double x) { return problem.u_x(x, 0.0); }),
                 pivot_error(s0.V, [&](double x) { return problem.v(x, t_mh); }));

  for (int n = 0; n <= N; ++n) {
    const auto& smp = rep.samples[static_cast<std::size_t>(n)];
    rep.max_eps0 = std::max(rep.max_eps0, smp.eps0);
    if (n >= 1) rep.max_eps1 = std::max(rep.max_eps1, smp.eps1);
  }
  rep.bound_U = rep.max_eps0 + rep.initial_energy_error + 2.0 * rep.eta_total;
  rep.bound_V = rep.max_eps1 + rep.initial_energy_error + 2.0 * rep.eta_total;

  const Mesh1D& m0 = s0.space()->mesh();
  const double c = s0.space()->wave_speed(0);
  const double scale =
      std::hypot(c * analytic_pivot_norm(m0, [&](double x) { return problem.u_x(x, 0.0); }),
                 analytic_pivot_norm(m0, [&](double x) { return problem.v(x, 0.0); }));
  double worst = 0.0;
  for (int n = 0; n <= N; ++n) {
    const WaveState& s = traj.state(n);
    const double t = grid.node(n);
    const double th = grid.node(HalfIndex::staggered(n));
    const double eu = potential_error(s.U, [&](double x) { return problem.u_x(x, t); });
    const double ev = pivot_error(s.V, [&](double x) { return problem.v(x, th); });
    const double el2 = pivot_error(s.U, [&](double x) { return problem.u(x, t); });
    rep.true_error_U = std::max(rep.true_error_U, eu);
    if (n >= 1) rep.true_error_V = std::max(rep.true_error_V, ev);
    rep.l2_error_U = std::max(rep.l2_error_U, el2);
    worst = std::max(worst, std::hypot(eu, ev));
  }
  rep.relative_energy_error = scale > 0.0 ? worst / scale : worst;
  return rep;
}

}  // namespace wave_apost
