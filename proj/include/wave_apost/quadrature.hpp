#pragma once

#include <array>
#include <cmath>

namespace wave_apost::quad {

/// Gauss-Legendre rule on [-1, 1].
template <int N>
struct Gauss;

template <>
struct Gauss<2> {
  static constexpr std::array<double, 2> x{-0.57735026918962576, 0.57735026918962576};
  static constexpr std::array<double, 2> w{1.0, 1.0};
};

template <>
struct Gauss<3> {
  static constexpr std::array<double, 3> x{-0.77459666924148338, 0.0, 0.77459666924148338};
  static constexpr std::array<double, 3> w{0.55555555555555556, 0.88888888888888889,
                                           0.55555555555555556};
};

template <>
struct Gauss<5> {
  static constexpr std::array<double, 5> x{-0.90617984593866399, -0.53846931010568309, 0.0,
                                           0.53846931010568309, 0.90617984593866399};
  static constexpr std::array<double, 5> w{0.23692688505618909, 0.47862867049936647,
                                           0.56888888888888889, 0.47862867049936647,
                                           0.23692688505618909};
};

/// Integrate f over [lo, hi] with the N-point rule.
template <int N, class F>
double integrate(F&& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double s = 0.0;
  for (int q = 0; q < N; ++q) s += Gauss<N>::w[q] * f(mid + half * Gauss<N>::x[q]);
  return s * half;
}

/// Nodes of the N-point rule mapped to [lo, hi]; weights include the Jacobian.
template <int N>
std::array<double, N> mapped_nodes(double lo, double hi) {
  std::array<double, N> t{};
  for (int q = 0; q < N; ++q) t[q] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * Gauss<N>::x[q];
  return t;
}

template <int N>
std::array<double, N> mapped_weights(double lo, double hi) {
  std::array<double, N> w{};
  for (int q = 0; q < N; ++q) w[q] = 0.5 * (hi - lo) * Gauss<N>::w[q];
  return w;
}

}  // namespace wave_apost::quad
