#include "wave_apost/timegrid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wave_apost {

TimeGrid::TimeGrid(double final_time, int steps) : final_time_(final_time), steps_(steps) {
  if (!(final_time > 0.0) || !std::isfinite(final_time)) {
    throw ConfigError("final time must be positive and finite");
  }
  if (steps < 1) throw ConfigError("time grid needs at least one step");
  tau_ = final_time / steps;
}

TimeGrid TimeGrid::initial_only(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("step size must be positive");
  TimeGrid g(tau, 1);
  g.final_time_ = 0.0;
  g.steps_ = 0;
  return g;
}

void TimeGrid::check_index(HalfIndex nu) const {
  if (nu.twice < -1 || nu.twice > 2 * steps_ + 1) {
    throw IndexError("time index " + std::to_string(nu.value()) + " outside [-1/2, N+1/2]");
  }
}

double TimeGrid::node(HalfIndex nu) const {
  check_index(nu);
  if (nu.twice == 2 * steps_) return final_time_;
  return 0.5 * nu.twice * tau_;
}

double hat_basis_raw(double tau, HalfIndex nu, double t) {
  const double center = 0.5 * nu.twice * tau;
  return std::max(0.0, 1.0 - std::abs(t - center) / tau);
}

// The bubble is the positive part of (t - t_{nu-1/2})(t_{nu+1/2} - t) / (2 tau^2),
// i.e. it lives on |t - t_nu| <= tau/2.
double bubble_raw(double tau, HalfIndex nu, double t) {
  const double center = 0.5 * nu.twice * tau;
  const double lo = center - 0.5 * tau;
  const double hi = center + 0.5 * tau;
  return std::max(0.0, (t - lo) * (hi - t) / (2.0 * tau * tau));
}

double hat_basis(const TimeGrid& grid, HalfIndex nu, double t) {
  grid.check_index(nu);
  return hat_basis_raw(grid.tau(), nu, t);
}

double bubble(const TimeGrid& grid, HalfIndex nu, double t) {
  grid.check_index(nu);
  return bubble_raw(grid.tau(), nu, t);
}

}  // namespace wave_apost
