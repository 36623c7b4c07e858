#pragma once

#include <stdexcept>
#include <string>

namespace wave_apost {

/// Invalid user-supplied parameters (bad H, theta outside (0,1), ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Out-of-range time index or missing neighbour in a node sequence.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Evaluation point outside the span of a sequence or mesh.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Two meshes that do not descend from the same macro partition.
class IncompatibleMeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-physical or non-finite data (c <= 0, NaN in a load integrand).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-convergent iteration or unstable time stepping.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wave_apost
