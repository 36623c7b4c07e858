#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "wave_apost/errors.hpp"
#include "wave_apost/estimators.hpp"
#include "wave_apost/experiment.hpp"

using namespace wave_apost;

namespace {

Vec random_coeffs(Eigen::Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Vec c(n);
  for (Eigen::Index i = 0; i < n; ++i) c[i] = u(rng);
  return c;
}

DiscreteField hat(const SpacePtr& sp, Eigen::Index i) {
  DiscreteField f(sp, Vec::Zero(sp->dim()));
  f.coeffs[i] = 1.0;
  return f;
}

// Brute force: strong part from the nodal values of A w (lumped, uniform h,
// c = 1) integrated by Simpson, jump part by enumerating slope changes.
double brute_force_br(const DiscreteField& w, int sigma) {
  const Mesh1D& m = w.space->mesh();
  const std::size_t nn = m.num_nodes();
  std::vector<double> aw(nn, 0.0), val(nn, 0.0);
  for (std::size_t k = 1; k + 1 < nn; ++k) val[k] = w.coeffs[static_cast<Eigen::Index>(k) - 1];
  double jumps = 0.0;
  for (std::size_t k = 1; k + 1 < nn; ++k) {
    const double hl = m.node(k) - m.node(k - 1), hr = m.node(k + 1) - m.node(k);
    const double sl = (val[k] - val[k - 1]) / hl, sr = (val[k + 1] - val[k]) / hr;
    aw[k] = -(sr - sl) / (0.5 * (hl + hr));
    const double hk = std::max(hl, hr);
    jumps += std::pow(hk, 2 * sigma - 1) * (sr - sl) * (sr - sl);
  }
  double strong = 0.0;
  for (std::size_t e = 0; e + 1 < nn; ++e) {
    const double h = m.node(e + 1) - m.node(e);
    const double a = aw[e], b = aw[e + 1], mid = 0.5 * (a + b);
    strong += std::pow(h, 2 * sigma) * h / 6.0 * (a * a + 4 * mid * mid + b * b);
  }
  return std::sqrt(strong) + std::sqrt(jumps);
}

}  // namespace

TEST(BrEstimator, ZeroField) {
  const auto sp = FeSpace::create(build_uniform(0, 1, 0.1));
  EXPECT_EQ(br_estimator(DiscreteField(sp), sp, BrNorm::energy), 0.0);
  EXPECT_EQ(br_estimator(DiscreteField(sp), sp, BrNorm::pivot), 0.0);
}

TEST(BrEstimator, SingleHatHandValue) {
  const double h = 0.1;
  const auto sp = FeSpace::create(build_uniform(0, 2, h));
  const DiscreteField w = hat(sp, 8);
  // strong part: h * |A w| with A w nodal (-1, 2, -1)/h^2 -> sqrt(8/(3h)); jumps +1/h, -2/h, +1/h -> sqrt(6/h)
  EXPECT_NEAR(br_estimator(w, sp, BrNorm::energy), std::sqrt(8.0 / (3.0 * h)) + std::sqrt(6.0 / h), 1e-10);
  EXPECT_NEAR(br_estimator(w, sp, BrNorm::pivot), std::sqrt(8.0 * h / 3.0) + std::sqrt(6.0 * h), 1e-12);
  EXPECT_NEAR(br_estimator(w, sp, BrNorm::energy), brute_force_br(w, 1), 1e-10);
}

TEST(BrEstimator, RandomFieldsMatchBruteForceOnUniformMesh) {
  const auto sp = FeSpace::create(build_uniform(-1, 1, 0.125));
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const DiscreteField w(sp, random_coeffs(sp->dim(), seed));
    EXPECT_NEAR(br_estimator(w, sp, BrNorm::energy), brute_force_br(w, 1), 1e-10);
    EXPECT_NEAR(br_estimator(w, sp, BrNorm::pivot), brute_force_br(w, 2), 1e-12);
  }
}

TEST(BrEstimator, IncompatibleMeshes) {
  const auto a = FeSpace::create(build_uniform(0, 1, 0.25));
  const auto b = FeSpace::create(build_uniform(0, 1, 1.0 / 3.0));
  EXPECT_THROW(br_estimator(hat(a, 1), b, BrNorm::energy), IncompatibleMeshError);
}

TEST(EstimatorFunctional, ZeroField) {
  const Mesh1D coarse = build_uniform(-2, 2, 0.25);
  const auto cs = FeSpace::create(coarse);
  const auto fs = FeSpace::create(refine_uniformly(coarse, 1));
  EXPECT_EQ(estimator_functional(DiscreteField(fs), cs, BrNorm::energy), 0.0);
  EXPECT_EQ(estimator_functional(DiscreteField(fs), fs, BrNorm::pivot), 0.0);
}

TEST(EstimatorFunctional, CoarseTargetLargerInPivotNorm) {
  const Mesh1D coarse = build_uniform(-2, 2, 0.25);
  const auto cs = FeSpace::create(coarse);
  const auto fs = FeSpace::create(refine_uniformly(coarse, 1));
  for (unsigned seed = 1; seed <= 10; ++seed) {
    const DiscreteField w(fs, random_coeffs(fs->dim(), seed));
    EXPECT_GE(estimator_functional(w, cs, BrNorm::pivot), estimator_functional(w, fs, BrNorm::pivot))
        << "seed " << seed;
  }
}

// In the energy norm the coarse target drops the fine-scale part of A_V w
// while weighting the jumps more; neither effect dominates for every field.
TEST(EstimatorFunctional, CoarseTargetInEnergyNormNotAlwaysLarger) {
  const Mesh1D coarse = build_uniform(-2, 2, 0.25);
  const auto cs = FeSpace::create(coarse);
  const auto fs = FeSpace::create(refine_uniformly(coarse, 1));
  int larger = 0;
  double worst = 1e300;
  for (unsigned seed = 1; seed <= 10; ++seed) {
    const DiscreteField w(fs, random_coeffs(fs->dim(), seed));
    const double r = estimator_functional(w, cs, BrNorm::energy) / estimator_functional(w, fs, BrNorm::energy);
    larger += r >= 1.0;
    worst = std::min(worst, r);
  }
  EXPECT_EQ(larger, 9);
  EXPECT_GT(worst, 0.9);
}

TEST(ReferenceReconstruction, Examples) {
  SpaceOptions o;
  o.mass = MassMode::consistent;
  const auto sp = FeSpace::create(build_window_mesh(-2, 2, 8, Interval{-0.4, 0.4}), o);
  EXPECT_EQ(reference_reconstruction(DiscreteField(sp), 2).coeffs.cwiseAbs().maxCoeff(), 0.0);
  const DiscreteField phi(sp, random_coeffs(sp->dim(), 3));
  const DiscreteField same = reference_reconstruction(phi, 0);
  EXPECT_LT((same.coeffs - phi.coeffs).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(ReferenceReconstruction, HatReliability) {
  for (MassMode mm : {MassMode::lumped, MassMode::consistent}) {
    SpaceOptions o;
    o.mass = mm;
    const auto sp = FeSpace::create(build_uniform(-1, 1, 0.125), o);
    const DiscreteField w = hat(sp, 7);
    EXPECT_LE(reconstruction_error(w, 4), br_estimator(w, sp, BrNorm::energy));
  }
}

TEST(ReferenceReconstruction, RandomFieldReliability) {
  for (const auto& s : br_reliability(5, 4)) EXPECT_LE(s.reconstruction_error, s.estimator);
}

TEST(Indicators, FixedMeshHasNoMeshChangeTerms) {
  AppConfig cfg;
  cfg.run.mesh_mode = MeshMode::fixed_window;
  const RunOutcome out = execute(cfg);
  EXPECT_TRUE(out.trajectory.mesh_change_steps.empty());
  for (const auto& s : out.report.samples) {
    EXPECT_EQ(s.mu0, 0.0);
    EXPECT_EQ(s.mu1, 0.0);
    EXPECT_EQ(s.mu2, 0.0);
  }
}

TEST(Indicators, MovingMeshHasMeshChangeTerms) {
  const RunOutcome out = execute(AppConfig{});
  double mu = 0.0;
  for (const auto& s : out.report.samples) mu = std::max({mu, s.mu0, s.mu1, s.mu2});
  EXPECT_GT(mu, 0.0);
}

TEST(Indicators, ZeroSourceHasNoDataTerm) {
  const RunOutcome out = execute(AppConfig{});
  for (const auto& s : out.report.samples)
    for (double d : s.delta_quad) EXPECT_EQ(d, 0.0);
}

TEST(Indicators, NoFineElementsGivesNoLtsTerm) {
  AppConfig cfg;
  cfg.run.mesh_mode = MeshMode::uniform_coarse;
  const RunOutcome out = execute(cfg);
  for (const auto& s : out.report.samples) {
    EXPECT_EQ(s.alpha0, 0.0);
    EXPECT_DOUBLE_EQ(s.alpha, s.alpha1 + s.mu2);
  }
}

TEST(Indicators, InvariantsOnPulseSetup) {
  const RunOutcome out = execute(AppConfig{});
  for (const auto& s : out.report.samples) {
    for (double v : {s.mu0, s.mu1, s.mu2, s.alpha0, s.alpha1, s.alpha, s.eps0, s.eps1, s.eta}) {
      EXPECT_GE(v, 0.0);
      EXPECT_TRUE(std::isfinite(v));
    }
    EXPECT_DOUBLE_EQ(s.alpha, s.alpha0 + s.alpha1 + s.mu2);
    EXPECT_GT(s.alpha0, 0.0);
  }
}

TEST(Indicators, SourceGivesDataTerm) {
  AppConfig cfg;
  Problem p = make_problem("gaussian_pulse");
  p.f = [](double x, double t) { return std::exp(-x * x) * std::cos(5 * t); };
  RunConfig rc = cfg.run;
  const Trajectory traj = run(rc, p);
  const IndicatorSample s = indicators_at(traj, 2, p);
  EXPECT_GT(*std::max_element(s.delta_quad.begin(), s.delta_quad.end()), 0.0);
}

TEST(Accumulate, ZeroAndConstant) {
  const TimeGrid g(1.0, 4);
  std::vector<IndicatorSample> zero(5);
  for (int n = 0; n <= 4; ++n) zero[static_cast<std::size_t>(n)].n = n;
  const Accumulation a0 = accumulate(zero, g);
  ASSERT_EQ(a0.eta_m.size(), 8u);
  for (double e : a0.eta_m) EXPECT_EQ(e, 0.0);
  EXPECT_EQ(a0.total, 0.0);

  const double c = 2.5;
  std::vector<IndicatorSample> first = zero, second = zero;
  for (auto& s : first) s.mu0 = c;
  for (auto& s : second) s.alpha = c;
  for (const auto* samples : {&first, &second}) {
    const Accumulation a = accumulate(*samples, g);
    for (double e : a.eta_m) EXPECT_NEAR(e, c * g.tau() / 2.0, 1e-15);
    EXPECT_NEAR(a.total, c * 1.0, 1e-14);
  }

  // both components: sqrt(3^2 + 4^2) = 5
  std::vector<IndicatorSample> both = zero;
  for (auto& s : both) {
    s.mu0 = 3.0;
    s.alpha = 4.0;
  }
  EXPECT_NEAR(accumulate(both, g).total, 5.0, 1e-14);
}

TEST(Accumulate, IndexConvention) {
  // mu0 nonzero only at n = 2 feeds the two halves of I_2 (m = 3, 4);
  // alpha nonzero only at k = 2 feeds m = 4, 5
  const TimeGrid g(1.0, 4);
  std::vector<IndicatorSample> a(5), b(5);
  a[2].mu0 = 1.0;
  b[2].alpha = 1.0;
  const Accumulation ra = accumulate(a, g), rb = accumulate(b, g);
  for (int m = 1; m <= 8; ++m) {
    const auto i = static_cast<std::size_t>(m - 1);
    EXPECT_NEAR(ra.eta_m[i], (m == 3 || m == 4) ? g.tau() / 2 : 0.0, 1e-15) << m;
    EXPECT_NEAR(rb.eta_m[i], (m == 4 || m == 5) ? g.tau() / 2 : 0.0, 1e-15) << m;
  }
}

TEST(TotalBounds, ZeroData) {
  AppConfig cfg;
  cfg.problem = "zero";
  const RunOutcome out = execute(cfg);
  EXPECT_EQ(out.report.bound_U, 0.0);
  EXPECT_EQ(out.report.bound_V, 0.0);
  EXPECT_EQ(out.report.true_error_U, 0.0);
  EXPECT_EQ(out.report.true_error_V, 0.0);
}

TEST(TotalBounds, SelfConsistentAndReliable) {
  const RunOutcome out = execute(AppConfig{});
  const EstimateReport& r = out.report;
  const int N = out.trajectory.steps();
  double e0 = 0.0, e1 = 0.0, eta = 0.0;
  for (const auto& s : r.samples) {
    e0 = std::max(e0, s.eps0);
    if (s.n >= 1) e1 = std::max(e1, s.eps1);
  }
  for (double e : r.eta_m) eta += e;
  ASSERT_EQ(r.eta_m.size(), static_cast<std::size_t>(2 * N));
  EXPECT_NEAR(r.bound_U, e0 + r.initial_energy_error + 2.0 * eta, 1e-12 * r.bound_U);
  EXPECT_NEAR(r.bound_V, e1 + r.initial_energy_error + 2.0 * eta, 1e-12 * r.bound_V);
  EXPECT_GE(r.bound_U, r.true_error_U);
  EXPECT_GE(r.bound_V, r.true_error_V);
  EXPECT_LE(r.bound_V, r.bound_U);
}

TEST(TotalBounds, NeedsExactSolutionAndGhostSteps) {
  RunConfig rc;
  Problem p = make_problem("gaussian_pulse");
  const Trajectory with = run(rc, p);
  Problem no_exact = p;
  no_exact.u = nullptr;
  EXPECT_THROW(total_bounds(with, no_exact), ConfigError);
  rc.ghost_steps = false;
  EXPECT_THROW(total_bounds(run(rc, p), p), ConfigError);
}

TEST(Identities, AllHold) {
  for (const auto& c : verify_reconstruction_identities()) {
    EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
    EXPECT_LT(c.max_residual, 1e-12) << c.name;
  }
}

TEST(Identities, ConstantSequencesGiveZero) {
  const double tau = 0.1;
  const NodeSequence<double> u(HalfIndex::integer(-1), std::vector<double>(6, 2.0));
  EXPECT_EQ(second_diff(u, HalfIndex::integer(1), tau), 0.0);
  EXPECT_EQ(pw_linear_interp(u, tau, 0.13) - 2.0, 0.0);
}

TEST(Identities, FlippedBubbleIsDetected) {
  IdentityOptions o;
  o.trials = 5;
  o.bubble = [](double tau, HalfIndex nu, double t) { return -bubble_raw(tau, nu, t); };
  int failed = 0;
  std::string where;
  for (const auto& c : verify_reconstruction_identities(o)) {
    if (!c.passed) {
      ++failed;
      where = c.detail;
    }
  }
  EXPECT_GE(failed, 2);
  EXPECT_NE(where.find("n="), std::string::npos);
}
