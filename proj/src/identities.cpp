#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include <Eigen/Eigenvalues>

#include "wave_apost/estimators.hpp"
#include "wave_apost/quadrature.hpp"

namespace wave_apost {

namespace {

using Seq = NodeSequence<Vec>;

struct Tracker {
  IdentityCheck check;
  double tol;

  void record(double residual, double scale, int trial, int n, double t) {
    const double rel = residual / std::max(scale, 1e-300);
    if (rel > check.max_residual) check.max_residual = rel;
    if (rel > tol && check.passed) {
      check.passed = false;
      char buf[160];
      std::snprintf(buf, sizeof buf, "trial %d, n=%d, t=%.17g: relative residual %.3e", trial, n,
                    t, rel);
      check.detail = buf;
    }
  }
};

Vec random_vec(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = nd(rng);
  return v;
}

double max_abs(const Seq& s) {
  double m = 0.0;
  for (const auto& v : s.values()) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

// Values of the piecewise linear interpolant of `seq` at the nodes of the
// opposite grid, from `first` on, `count` of them.
Seq restagger(const Seq& seq, double tau, HalfIndex first, int count) {
  std::vector<Vec> out;
  for (int i = 0; i < count; ++i) {
    const HalfIndex nu = first + i;
    out.push_back(pw_linear_interp(seq, tau, 0.5 * nu.twice * tau));
  }
  return Seq(first, std::move(out));
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Finite-dimensional scheme: v^{k+1/2} = v^{k-1/2} + tau (F^k - Ã U^k),
// U^{k+1} = U^k + tau v^{k+1/2}, with A symmetric positive definite.
struct Model {
  Eigen::MatrixXd A;
  Eigen::MatrixXd At;
  Seq U;  // integer indices -1 .. N+2
  Seq v;  // staggered -3/2 .. N+3/2, stored from index -1 (= -3/2)
  Seq F;  // integer -1 .. N+2
};

Model make_model(std::mt19937_64& rng, int d, int N, double tau) {
  Model m;
  Eigen::MatrixXd B(d, d);
  for (int j = 0; j < d; ++j) B.col(j) = random_vec(rng, d);
  Eigen::MatrixXd S = B.transpose() * B / d + 0.1 * Eigen::MatrixXd::Identity(d, d);
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S).eigenvalues().maxCoeff();
  m.A = S * (2.0 / (tau * tau * lmax));
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) P(i, i) = (rng() % 2) ? 1.0 : 0.0;
  m.At = m.A - (tau * tau / 16.0) * m.A * P * m.A;
  std::vector<Vec> U{random_vec(rng, d)};
  std::vector<Vec> v{random_vec(rng, d)};
  std::vector<Vec> F;
  for (int k = -1; k <= N + 1; ++k) {
    F.push_back(random_vec(rng, d));
    v.push_back(v.back() + tau * (F.back() - m.At * U.back()));
    U.push_back(U.back() + tau * v.back());
  }
  F.push_back(random_vec(rng, d));
  m.U = Seq(HalfIndex::integer(-1), std::move(U));
  m.v = Seq(HalfIndex::staggered(-1), std::move(v));
  m.F = Seq(HalfIndex::integer(-1), std::move(F));
  return m;
}

}  // namespace

std::vector<IdentityCheck> verify_reconstruction_identities(const IdentityOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  const int N = opts.intervals;
  const int d = opts.dim;
  const auto& q = opts.bubble;

  Tracker stag{{"staggered interpolation identity", true, 0.0, {}}, std::max(opts.tolerance, 1e-14)};
  Tracker lin_v{{"piecewise linear time-reconstruction residual (velocity)", true, 0.0, {}}, opts.tolerance};
  Tracker lin_u{{"piecewise linear time-reconstruction residual (displacement)", true, 0.0, {}}, opts.tolerance};
  Tracker quad_r{{"quadratic time-reconstruction residual", true, 0.0, {}}, opts.tolerance};
  Tracker interp{{"quadratic time-reconstructions interpolate at nodes", true, 0.0, {}}, opts.tolerance};
  Tracker full_v{{"full time-reconstruction residual (velocity)", true, 0.0, {}}, opts.tolerance};
  Tracker full_u{{"full time-reconstruction residual (displacement)", true, 0.0, {}}, opts.tolerance};

  for (int trial = 0; trial < opts.trials; ++trial) {
    const double tau = uniform(rng, 0.05, 0.5);
    auto tn = [&](double nu) { return nu * tau; };

    // arbitrary sequences: omega on -1..N+1, v on -3/2..N+3/2
    {
      std::vector<Vec> w;
      std::vector<Vec> v;
      for (int k = 0; k <= N + 2; ++k) w.push_back(random_vec(rng, d));
      for (int k = 0; k <= N + 3; ++k) v.push_back(random_vec(rng, d));
      const Seq om(HalfIndex::integer(-1), std::move(w));
      const Seq vs(HalfIndex::staggered(-1), std::move(v));
      const double su = max_abs(om);
      const double sv = max_abs(vs);
      // omega-bar at staggered nodes -1/2 .. N+1/2, V-bar at integer nodes -1 .. N+1
      const Seq om_st = restagger(om, tau, HalfIndex::staggered(0), N + 2);
      const Seq v_int = restagger(vs, tau, HalfIndex::integer(-1), N + 3);

      for (int n = 0; n <= N; ++n) {
        const Vec lhs = pw_linear_interp(om_st, tau, tn(n));
        const Vec rhs = 0.25 * (om.at(HalfIndex::integer(n - 1)) + 2.0 * om.at(HalfIndex::integer(n)) +
                                om.at(HalfIndex::integer(n + 1)));
        stag.record((lhs - rhs).lpNorm<Eigen::Infinity>(), su, trial, n, tn(n));
      }
      for (int n = 0; n <= N; ++n) {
        const Vec d2m = second_diff(vs, HalfIndex::staggered(n), tau);
        const Vec d2p = second_diff(vs, HalfIndex::staggered(n + 1), tau);
        for (int r = 0; r < opts.times_per_interval; ++r) {
          const double t = uniform(rng, tn(n - 0.5), tn(n + 0.5));
          const Vec lhs = pw_linear_interp(v_int, tau, t) - pw_linear_interp(vs, tau, t);
          const Vec rhs = 0.5 * tau * tau *
                          (d2m * hat_basis_raw(tau, HalfIndex::integer(n - 1), t) +
                           d2p * hat_basis_raw(tau, HalfIndex::integer(n + 1), t));
          lin_v.record((lhs - rhs).lpNorm<Eigen::Infinity>(), sv, trial, n, t);
        }
      }
      for (int n = 1; n <= N; ++n) {
        const Vec d2m = second_diff(om, HalfIndex::integer(n - 1), tau);
        const Vec d2p = second_diff(om, HalfIndex::integer(n), tau);
        for (int r = 0; r < opts.times_per_interval; ++r) {
          const double t = uniform(rng, tn(n - 1), tn(n));
          const Vec lhs = pw_linear_interp(om_st, tau, t) - pw_linear_interp(om, tau, t);
          const Vec rhs = 0.5 * tau * tau *
                          (d2m * hat_basis_raw(tau, HalfIndex::staggered(n - 1), t) +
                           d2p * hat_basis_raw(tau, HalfIndex::staggered(n + 1), t));
          lin_u.record((lhs - rhs).lpNorm<Eigen::Infinity>(), su, trial, n, t);
        }
      }
    }

    // scheme-generated sequences for the quadratic reconstructions
    {
      const Model m = make_model(rng, d, N, tau);
      const double su = max_abs(m.U);
      const double sv = max_abs(m.v);
      const Seq om_st = restagger(m.U, tau, HalfIndex::staggered(0), N + 3);   // -1/2 .. N+3/2
      const Seq v_int = restagger(m.v, tau, HalfIndex::integer(-1), N + 3);    // -1 .. N+1

      auto U = [&](int k) -> const Vec& { return m.U.at(HalfIndex::integer(k)); };
      auto V = [&](int k) -> const Vec& { return m.v.at(HalfIndex::staggered(k)); };  // v^{k-1/2}

      // omega-breve on I_n
      auto omega_breve = [&](int n, double t) {
        const Vec Q = -0.25 * tau * tau * second_diff(m.v, HalfIndex::staggered(n), tau);
        const double lo = tn(n - 1);
        Vec integral = Vec::Zero(d);
        const auto xs = quad::mapped_nodes<3>(lo, t);
        const auto ws = quad::mapped_weights<3>(lo, t);
        for (int i = 0; i < 3; ++i) integral += ws[i] * pw_linear_interp(v_int, tau, xs[i]);
        return Vec(U(n - 1) + integral + (t - lo) * Q);
      };
      // V-breve on [t_{n-1/2}, t_{n+1/2}]
      auto v_breve = [&](int n, double t) {
        const Vec R = 0.25 * tau * tau * m.A * second_diff(m.U, HalfIndex::integer(n), tau) +
                      (m.A - m.At) * U(n);
        const double lo = tn(n - 0.5);
        Vec s = Vec::Zero(d);
        const auto xs = quad::mapped_nodes<3>(lo, t);
        const auto ws = quad::mapped_weights<3>(lo, t);
        for (int i = 0; i < 3; ++i) s += ws[i] * pw_linear_interp(om_st, tau, xs[i]);
        return Vec(V(n) - m.A * s + (t - lo) * (m.F.at(HalfIndex::integer(n)) + R));
      };

      for (int n = 1; n <= N; ++n) {
        interp.record((omega_breve(n, tn(n)) - U(n)).lpNorm<Eigen::Infinity>(), su, trial, n, tn(n));
        interp.record((v_breve(n, tn(n + 0.5)) - V(n + 1)).lpNorm<Eigen::Infinity>(), sv, trial, n,
                      tn(n + 0.5));
        const Vec d0AU = m.A * cent_diff(m.U, HalfIndex::integer(n), tau);
        const Vec d0v = cent_diff(m.v, HalfIndex::staggered(n), tau);
        const Vec d2vm = second_diff(m.v, HalfIndex::staggered(n), tau);
        const Vec d2vp = second_diff(m.v, HalfIndex::staggered(n + 1), tau);
        const Vec d2um = second_diff(m.U, HalfIndex::integer(n - 1), tau);
        const Vec d2u = second_diff(m.U, HalfIndex::integer(n), tau);
        for (int r = 0; r < opts.times_per_interval; ++r) {
          const double tv = uniform(rng, tn(n - 0.5), tn(n + 0.5));
          const Vec vb = v_breve(n, tv);
          const Vec vbar = pw_linear_interp(m.v, tau, tv);
          const double qn = q(tau, HalfIndex::integer(n), tv);
          quad_r.record((vb - vbar - d0AU * qn * tau * tau).lpNorm<Eigen::Infinity>(), sv, trial, n, tv);
          const Vec vhat = pw_linear_interp(v_int, tau, tv);
          const Vec rhs_v = tau * tau *
                            (0.5 * (d2vm * hat_basis_raw(tau, HalfIndex::integer(n - 1), tv) +
                                    d2vp * hat_basis_raw(tau, HalfIndex::integer(n + 1), tv)) -
                             d0AU * qn);
          full_v.record((vhat - vb - rhs_v).lpNorm<Eigen::Infinity>(), sv, trial, n, tv);

          const double tu = uniform(rng, tn(n - 1), tn(n));
          const Vec ob = omega_breve(n, tu);
          const Vec obar = pw_linear_interp(m.U, tau, tu);
          const double qh = q(tau, HalfIndex::staggered(n), tu);
          quad_r.record((ob - obar + d0v * qh * tau * tau).lpNorm<Eigen::Infinity>(), su, trial, n, tu);
          const Vec ohat = pw_linear_interp(om_st, tau, tu);
          const Vec rhs_u = tau * tau *
                            (0.5 * (d2um * hat_basis_raw(tau, HalfIndex::staggered(n - 1), tu) +
                                    d2u * hat_basis_raw(tau, HalfIndex::staggered(n + 1), tu)) +
                             d0v * qh);
          full_u.record((ohat - ob - rhs_u).lpNorm<Eigen::Infinity>(), su, trial, n, tu);
        }
      }
    }
  }
  return {stag.check, lin_v.check, lin_u.check, quad_r.check, interp.check, full_v.check, full_u.check};
}

}  // namespace wave_apost
