#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wave_apost {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(hi > lo); }
};

/// 1D partition of [a, b] obtained by dyadic refinement of a uniform macro
/// partition. Nodes are stored as integer keys on the lattice of spacing
/// macro_h / 2^kMaxLevel, so refinement relations between meshes built on
/// the same macro partition are exact set relations.
class Mesh1D {
 public:
  static constexpr int kMaxLevel = 20;
  static constexpr std::int64_t kLevelScale = std::int64_t{1} << kMaxLevel;

  Mesh1D(double a, double b, int macro_count, std::vector<std::int64_t> keys);

  double a() const { return a_; }
  double b() const { return b_; }
  int macro_count() const { return macro_count_; }
  double macro_h() const { return (b_ - a_) / macro_count_; }

  std::size_t num_elements() const { return keys_.size() - 1; }
  std::size_t num_nodes() const { return keys_.size(); }

  const std::vector<std::int64_t>& keys() const { return keys_; }
  double coord_of_key(std::int64_t key) const;
  double node(std::size_t i) const { return coord_of_key(keys_[i]); }
  std::vector<double> nodes() const;

  double left(std::size_t e) const { return node(e); }
  double right(std::size_t e) const { return node(e + 1); }
  double width(std::size_t e) const;
  int level(std::size_t e) const;
  int macro_of(std::size_t e) const;
  int max_level() const;

  /// Element index containing key (the left one when key is a node).
  std::size_t element_of_key(std::int64_t key) const;
  /// Element index containing x; throws RangeError outside [a, b].
  std::size_t locate(double x) const;

  bool compatible_with(const Mesh1D& other) const;
  /// True when every node of `coarser` is a node of this mesh.
  bool refines(const Mesh1D& coarser) const;

  /// One coordinate per line.
  std::string to_text() const;

  bool operator==(const Mesh1D& other) const {
    return compatible_with(other) && keys_ == other.keys_;
  }

 private:
  double a_;
  double b_;
  int macro_count_;
  std::vector<std::int64_t> keys_;
};

Mesh1D build_uniform(double a, double b, double h);

/// Macro width H (count rounded); macro cells whose open interior meets the
/// window are bisected once.
Mesh1D build_window_mesh(double a, double b, double H, Interval window);
Mesh1D build_window_mesh(double a, double b, int macro_count, Interval window);

/// Rebuild on the macro partition of `mesh` with a new window.
Mesh1D advance_window(const Mesh1D& mesh, Interval new_window);

/// Every element bisected `times` times.
Mesh1D refine_uniformly(const Mesh1D& mesh, int times);

/// Elementwise finest mesh (node union).
Mesh1D common_refinement(const Mesh1D& A, const Mesh1D& B);
/// Elementwise coarsest common mesh (node intersection).
Mesh1D common_coarsening(const Mesh1D& A, const Mesh1D& B);

struct CoarseFineSplit {
  std::vector<bool> fine;

  std::vector<std::size_t> fine_elements() const;
  std::vector<std::size_t> coarse_elements() const;
  bool any_fine() const;
};

/// fine = {K : h_K <= theta * max h} plus their immediate neighbours.
CoarseFineSplit coarse_fine_split(const Mesh1D& mesh, double theta);

}  // namespace wave_apost
