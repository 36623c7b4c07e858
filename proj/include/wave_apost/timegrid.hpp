#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "wave_apost/errors.hpp"

namespace wave_apost {

/// Integer or half-integer time index, stored doubled so that
/// t_{n-1/2} and t_n are both exact integers in the bookkeeping.
struct HalfIndex {
  int twice = 0;

  static constexpr HalfIndex integer(int n) { return {2 * n}; }
  /// Index n - 1/2.
  static constexpr HalfIndex staggered(int n) { return {2 * n - 1}; }

  constexpr bool is_integer() const { return twice % 2 == 0; }
  constexpr double value() const { return 0.5 * twice; }
  constexpr HalfIndex operator+(int k) const { return {twice + 2 * k}; }
  constexpr HalfIndex operator-(int k) const { return {twice - 2 * k}; }
  constexpr HalfIndex half_up() const { return {twice + 1}; }
  constexpr HalfIndex half_down() const { return {twice - 1}; }
  constexpr auto operator<=>(const HalfIndex&) const = default;
};

/// Uniform primal grid t_n = n tau on [0, T] together with its staggered
/// companion t_{n+1/2}.
class TimeGrid {
 public:
  TimeGrid(double final_time, int steps);
  /// Degenerate grid holding only t_0 = 0 (N = 0) with a nominal step size.
  static TimeGrid initial_only(double tau);

  double final_time() const { return final_time_; }
  int steps() const { return steps_; }
  double tau() const { return tau_; }

  /// t_nu for nu in {-1/2, 0, ..., N + 1/2}; throws IndexError otherwise.
  double node(HalfIndex nu) const;
  double node(int n) const { return node(HalfIndex::integer(n)); }
  /// t_nu without range validation (ghost steps of the estimator layer).
  double node_unchecked(HalfIndex nu) const { return 0.5 * nu.twice * tau_; }

  void check_index(HalfIndex nu) const;

 private:
  double final_time_;
  int steps_;
  double tau_;
};

/// Hat function l_nu: 1 at t_nu, 0 at t_nu +- tau, affine in between.
double hat_basis(const TimeGrid& grid, HalfIndex nu, double t);

/// Quadratic bubble q_nu supported on [t_{nu-1/2}, t_{nu+1/2}], max 1/8 at t_nu.
double bubble(const TimeGrid& grid, HalfIndex nu, double t);

/// Grid-free versions used where the index leaves [-1/2, N+1/2].
double hat_basis_raw(double tau, HalfIndex nu, double t);
double bubble_raw(double tau, HalfIndex nu, double t);

/// Values indexed by a contiguous run of nodes of one parity
/// (all integer or all half-integer indices).
template <class T>
class NodeSequence {
 public:
  NodeSequence() = default;
  NodeSequence(HalfIndex first, std::vector<T> values)
      : first_(first), values_(std::move(values)) {}

  HalfIndex first() const { return first_; }
  HalfIndex last() const { return {first_.twice + 2 * (static_cast<int>(values_.size()) - 1)}; }
  std::size_t size() const { return values_.size(); }
  bool is_integer_grid() const { return first_.is_integer(); }

  bool contains(HalfIndex nu) const {
    if (values_.empty()) return false;
    const int offset = nu.twice - first_.twice;
    return offset >= 0 && offset % 2 == 0 && offset / 2 < static_cast<int>(values_.size());
  }

  const T& at(HalfIndex nu) const {
    if (!contains(nu)) {
      throw IndexError("node sequence has no value at index " + std::to_string(nu.value()));
    }
    return values_[static_cast<std::size_t>((nu.twice - first_.twice) / 2)];
  }

  const std::vector<T>& values() const { return values_; }

 private:
  HalfIndex first_{};
  std::vector<T> values_;
};

/// d+ phi^nu = (phi^{nu+1} - phi^nu) / tau
template <class T>
T fore_diff(const NodeSequence<T>& seq, HalfIndex nu, double tau) {
  return T((seq.at(nu + 1) - seq.at(nu)) / tau);
}

/// d0 phi^nu = (phi^{nu+1} - phi^{nu-1}) / (2 tau)
template <class T>
T cent_diff(const NodeSequence<T>& seq, HalfIndex nu, double tau) {
  return T((seq.at(nu + 1) - seq.at(nu - 1)) / (2.0 * tau));
}

/// d2 phi^nu = (phi^{nu+1} - 2 phi^nu + phi^{nu-1}) / tau^2
template <class T>
T second_diff(const NodeSequence<T>& seq, HalfIndex nu, double tau) {
  return T((seq.at(nu + 1) - 2.0 * seq.at(nu) + seq.at(nu - 1)) / (tau * tau));
}

/// Continuous piecewise-linear interpolant sum_nu phi^nu l_nu(t) on the
/// sequence's own grid parity.
template <class T>
T pw_linear_interp(const NodeSequence<T>& seq, double tau, double t) {
  if (seq.size() == 0) throw RangeError("interpolation of an empty sequence");
  const double t_first = 0.5 * seq.first().twice * tau;
  const double t_last = 0.5 * seq.last().twice * tau;
  const double slack = 1e-12 * std::max(1.0, std::abs(t_last));
  if (t < t_first - slack || t > t_last + slack) {
    throw RangeError("time " + std::to_string(t) + " outside the sequence span");
  }
  if (seq.size() == 1) return seq.values().front();
  const double s = (t - t_first) / tau;
  auto k = static_cast<std::size_t>(std::floor(s));
  if (k >= seq.size() - 1) k = seq.size() - 2;
  const double right = s - static_cast<double>(k);
  const auto& v = seq.values();
  return T((1.0 - right) * v[k] + right * v[k + 1]);
}

template <class T>
T pw_linear_interp(const NodeSequence<T>& seq, const TimeGrid& grid, double t) {
  return pw_linear_interp(seq, grid.tau(), t);
}

}  // namespace wave_apost
