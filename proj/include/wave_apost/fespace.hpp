#pragma once

#include <functional>
#include <initializer_list>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wave_apost/mesh.hpp"

namespace wave_apost {

using Vec = Eigen::VectorXd;
using SpaceFn = std::function<double(double)>;
using SpaceTimeFn = std::function<double(double, double)>;

enum class MassMode { lumped, consistent };

struct SpaceOptions {
  MassMode mass = MassMode::lumped;
  double theta = 0.75;
  int degree = 1;
  /// Wave speed per macro element; empty means c = 1, a single entry a constant.
  std::vector<double> wave_speed;
};

/// Symmetric or general tridiagonal matrix. lower[i] couples row i to i-1,
/// upper[i] couples row i to i+1.
struct Tridiag {
  Vec lower;
  Vec diag;
  Vec upper;

  explicit Tridiag(Eigen::Index n = 0)
      : lower(Vec::Zero(n)), diag(Vec::Zero(n)), upper(Vec::Zero(n)) {}

  Eigen::Index size() const { return diag.size(); }
  Vec apply(const Vec& x) const;
  /// Thomas algorithm; throws NumericalError on a zero pivot.
  Vec solve(const Vec& rhs) const;
  Eigen::MatrixXd dense() const;
};

struct OperatorMatrices {
  Tridiag stiffness;
  Tridiag mass_consistent;
  Vec mass_lumped;
  std::vector<double> c_element;
};

/// P1 stiffness and mass on the interior (Dirichlet-free) nodes.
OperatorMatrices assemble(const Mesh1D& mesh, const std::vector<double>& c_element);

class FeSpace;
using SpacePtr = std::shared_ptr<const FeSpace>;

/// Continuous P1 space on a Mesh1D with homogeneous Dirichlet endpoints.
/// Dof i sits on mesh node i + 1.
class FeSpace {
 public:
  static SpacePtr create(Mesh1D mesh, SpaceOptions options = {});
  SpacePtr on_mesh(Mesh1D mesh) const { return create(std::move(mesh), options_); }

  const Mesh1D& mesh() const { return mesh_; }
  const SpaceOptions& options() const { return options_; }
  MassMode mass_mode() const { return options_.mass; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(mesh_.num_nodes()) - 2; }
  double dof_coord(Eigen::Index i) const { return mesh_.node(static_cast<std::size_t>(i) + 1); }
  std::vector<double> dof_coords() const;

  const CoarseFineSplit& split() const { return split_; }
  const std::vector<bool>& fine_dof_mask() const { return fine_dof_; }
  bool has_fine_dofs() const;
  const OperatorMatrices& ops() const { return ops_; }
  double wave_speed(std::size_t element) const { return ops_.c_element[element]; }

  /// Discrete mass product in the configured mode.
  Vec mass_apply(const Vec& x) const;
  Vec mass_solve(const Vec& rhs) const;

  /// Nodal value (0 on the boundary) at mesh node i.
  double node_value(const Vec& coeffs, std::size_t node) const;
  /// Point evaluation at a lattice key / coordinate.
  double value_at_key(const Vec& coeffs, std::int64_t key) const;
  double value(const Vec& coeffs, double x) const;
  double slope(const Vec& coeffs, std::size_t element) const;

  bool same_as(const FeSpace& other) const;

 private:
  FeSpace(Mesh1D mesh, SpaceOptions options);

  Mesh1D mesh_;
  SpaceOptions options_;
  CoarseFineSplit split_;
  std::vector<bool> fine_dof_;
  OperatorMatrices ops_;
};

struct DiscreteField {
  SpacePtr space;
  Vec coeffs;

  DiscreteField() = default;
  explicit DiscreteField(SpacePtr s);
  DiscreteField(SpacePtr s, Vec c);

  static DiscreteField zero(SpacePtr s) { return DiscreteField(std::move(s)); }
  double operator()(double x) const { return space->value(coeffs, x); }
};

/// Arithmetic on fields of the same space.
DiscreteField operator+(const DiscreteField& x, const DiscreteField& y);
DiscreteField operator-(const DiscreteField& x, const DiscreteField& y);
DiscreteField operator*(double s, const DiscreteField& x);

struct Term {
  double weight;
  const DiscreteField* field;
};

/// Linear combination of fields on possibly different compatible spaces,
/// returned on their common refinement.
DiscreteField combine(std::initializer_list<Term> terms);
DiscreteField combine(const std::vector<Term>& terms);

/// Space of the common refinement of both spaces' meshes.
SpacePtr refinement_space(const SpacePtr& A, const SpacePtr& B);
/// Space on the coarsest common mesh (largest space contained in both).
SpacePtr intersection_space(const SpacePtr& A, const SpacePtr& B);

DiscreteField l2_project(const SpacePtr& space, const SpaceFn& g);
DiscreteField l2_project(const SpacePtr& space, const DiscreteField& g);

/// Nodal interpolation onto another compatible space.
DiscreteField pass_operator(const DiscreteField& from, const SpacePtr& to_space);

/// Keep fine-dof coefficients, zero the coarse ones.
DiscreteField fine_interpolator(const DiscreteField& field);
/// L2 projection (configured mass) onto the span of the fine basis functions.
DiscreteField fine_l2_project(const DiscreteField& field);

/// A phi = M^{-1} K phi.
DiscreteField discrete_elliptic_apply(const DiscreteField& field);
/// A phi - (tau^2/16) A P_f A phi.
DiscreteField lts_operator_apply(const DiscreteField& field, double tau);

/// F^n = P f(t_n) when continuous, otherwise the staggered-interval mean of P f.
DiscreteField source_approx(const SpacePtr& space, const SpaceTimeFn& f, double t_n, double tau,
                            bool continuous = true);

/// Exact L2 norm and product.
double pivot_norm(const DiscreteField& field);
double pivot_product(const DiscreteField& x, const DiscreteField& y);
/// ||c phi'||_{L2}.
double potential_norm(const DiscreteField& field);
double a_product(const DiscreteField& x, const DiscreteField& y);
double energy_norm(const DiscreteField& u, const DiscreteField& v);

/// Norms of (field - g) against analytic data, 5-point Gauss on 4 pieces per element.
double pivot_error(const DiscreteField& field, const SpaceFn& g);
double potential_error(const DiscreteField& field, const SpaceFn& g_x);
double analytic_pivot_norm(const Mesh1D& mesh, const SpaceFn& g);

}  // namespace wave_apost
