#include "wave_apost/fespace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wave_apost/errors.hpp"
#include "wave_apost/quadrature.hpp"

namespace wave_apost {

Vec Tridiag::apply(const Vec& x) const {
  const Eigen::Index n = size();
  Vec y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += lower[i] * x[i - 1];
    if (i + 1 < n) s += upper[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

Vec Tridiag::solve(const Vec& rhs) const {
  const Eigen::Index n = size();
  Vec c(n), d(n), x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double denom = diag[i];
    double r = rhs[i];
    if (i > 0) {
      denom -= lower[i] * c[i - 1];
      r -= lower[i] * d[i - 1];
    }
    if (denom == 0.0 || !std::isfinite(denom)) throw NumericalError("singular tridiagonal system");
    c[i] = (i + 1 < n) ? upper[i] / denom : 0.0;
    d[i] = r / denom;
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    x[i] = d[i];
    if (i + 1 < n) x[i] -= c[i] * x[i + 1];
  }
  return x;
}

Eigen::MatrixXd Tridiag::dense() const {
  const Eigen::Index n = size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = diag[i];
    if (i > 0) m(i, i - 1) = lower[i];
    if (i + 1 < n) m(i, i + 1) = upper[i];
  }
  return m;
}

OperatorMatrices assemble(const Mesh1D& mesh, const std::vector<double>& c_element) {
  const std::size_t ne = mesh.num_elements();
  if (c_element.size() != ne) throw DataError("wave speed must be given per element");
  for (double c : c_element) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DataError("wave speed must be positive");
  }
  const auto n = static_cast<Eigen::Index>(mesh.num_nodes()) - 2;
  OperatorMatrices ops;
  ops.stiffness = Tridiag(n);
  ops.mass_consistent = Tridiag(n);
  ops.mass_lumped = Vec::Zero(n);
  ops.c_element = c_element;
  // element e joins nodes e and e+1, i.e. dofs e-1 and e
  for (std::size_t e = 0; e < ne; ++e) {
    const double h = mesh.width(e);
    const double k = c_element[e] * c_element[e] / h;
    const auto l = static_cast<Eigen::Index>(e) - 1;
    const auto r = static_cast<Eigen::Index>(e);
    const bool has_l = l >= 0;
    const bool has_r = r < n;
    if (has_l) {
      ops.stiffness.diag[l] += k;
      ops.mass_consistent.diag[l] += h / 3.0;
      ops.mass_lumped[l] += h / 2.0;
    }
    if (has_r) {
      ops.stiffness.diag[r] += k;
      ops.mass_consistent.diag[r] += h / 3.0;
      ops.mass_lumped[r] += h / 2.0;
    }
    if (has_l && has_r) {
      ops.stiffness.upper[l] = -k;
      ops.stiffness.lower[r] = -k;
      ops.mass_consistent.upper[l] = h / 6.0;
      ops.mass_consistent.lower[r] = h / 6.0;
    }
  }
  return ops;
}

FeSpace::FeSpace(Mesh1D mesh, SpaceOptions options)
    : mesh_(std::move(mesh)), options_(std::move(options)) {
  if (options_.degree != 1) throw ConfigError("only degree 1 elements are available");
  const std::size_t ne = mesh_.num_elements();
  std::vector<double> c(ne, 1.0);
  const auto& ws = options_.wave_speed;
  if (ws.size() == 1) {
    std::fill(c.begin(), c.end(), ws.front());
  } else if (!ws.empty()) {
    if (ws.size() != static_cast<std::size_t>(mesh_.macro_count())) {
      throw ConfigError("wave speed list must have one entry per macro element");
    }
    for (std::size_t e = 0; e < ne; ++e) c[e] = ws[static_cast<std::size_t>(mesh_.macro_of(e))];
  }
  ops_ = assemble(mesh_, c);
  split_ = coarse_fine_split(mesh_, options_.theta);
  fine_dof_.assign(static_cast<std::size_t>(std::max<Eigen::Index>(dim(), 0)), false);
  for (Eigen::Index i = 0; i < dim(); ++i) {
    const auto node = static_cast<std::size_t>(i) + 1;
    fine_dof_[static_cast<std::size_t>(i)] = split_.fine[node - 1] || split_.fine[node];
  }
}

SpacePtr FeSpace::create(Mesh1D mesh, SpaceOptions options) {
  return SpacePtr(new FeSpace(std::move(mesh), std::move(options)));
}

std::vector<double> FeSpace::dof_coords() const {
  std::vector<double> x(static_cast<std::size_t>(dim()));
  for (Eigen::Index i = 0; i < dim(); ++i) x[static_cast<std::size_t>(i)] = dof_coord(i);
  return x;
}

bool FeSpace::has_fine_dofs() const {
  return std::find(fine_dof_.begin(), fine_dof_.end(), true) != fine_dof_.end();
}

Vec FeSpace::mass_apply(const Vec& x) const {
  if (options_.mass == MassMode::lumped) return ops_.mass_lumped.cwiseProduct(x);
  return ops_.mass_consistent.apply(x);
}

Vec FeSpace::mass_solve(const Vec& rhs) const {
  if (options_.mass == MassMode::lumped) return rhs.cwiseQuotient(ops_.mass_lumped);
  return ops_.mass_consistent.solve(rhs);
}

double FeSpace::node_value(const Vec& coeffs, std::size_t node) const {
  if (node == 0 || node + 1 >= mesh_.num_nodes()) return 0.0;
  return coeffs[static_cast<Eigen::Index>(node) - 1];
}

double FeSpace::value_at_key(const Vec& coeffs, std::int64_t key) const {
  const std::size_t e = mesh_.element_of_key(key);
  const std::int64_t k0 = mesh_.keys()[e];
  const std::int64_t k1 = mesh_.keys()[e + 1];
  const double s = static_cast<double>(key - k0) / static_cast<double>(k1 - k0);
  return (1.0 - s) * node_value(coeffs, e) + s * node_value(coeffs, e + 1);
}

double FeSpace::value(const Vec& coeffs, double x) const {
  const std::size_t e = mesh_.locate(x);
  const double s = std::clamp((x - mesh_.left(e)) / mesh_.width(e), 0.0, 1.0);
  return (1.0 - s) * node_value(coeffs, e) + s * node_value(coeffs, e + 1);
}

double FeSpace::slope(const Vec& coeffs, std::size_t element) const {
  return (node_value(coeffs, element + 1) - node_value(coeffs, element)) / mesh_.width(element);
}

bool FeSpace::same_as(const FeSpace& other) const {
  return this == &other || (mesh_ == other.mesh_ && options_.mass == other.options_.mass &&
                            options_.wave_speed == other.options_.wave_speed &&
                            options_.theta == other.options_.theta);
}

DiscreteField::DiscreteField(SpacePtr s) : space(std::move(s)) {
  coeffs = Vec::Zero(space->dim());
}

DiscreteField::DiscreteField(SpacePtr s, Vec c) : space(std::move(s)), coeffs(std::move(c)) {
  if (coeffs.size() != space->dim()) throw ConfigError("coefficient count does not match space");
}

namespace {

void require_same(const DiscreteField& x, const DiscreteField& y) {
  if (!x.space->same_as(*y.space)) {
    throw IncompatibleMeshError("field arithmetic needs a common space; use combine()");
  }
}

// Transpose of nodal interpolation from `space` onto the nodes of `fine`:
// given weights w_j on fine dofs returns sum_j w_j phi_i(x_j).
Vec interpolation_transpose(const FeSpace& space, const FeSpace& fine, const Vec& w) {
  Vec out = Vec::Zero(space.dim());
  const auto& keys = space.mesh().keys();
  for (Eigen::Index j = 0; j < fine.dim(); ++j) {
    const std::int64_t key = fine.mesh().keys()[static_cast<std::size_t>(j) + 1];
    const std::size_t e = space.mesh().element_of_key(key);
    const double s = static_cast<double>(key - keys[e]) / static_cast<double>(keys[e + 1] - keys[e]);
    const auto l = static_cast<Eigen::Index>(e) - 1;
    const auto r = static_cast<Eigen::Index>(e);
    if (l >= 0) out[l] += (1.0 - s) * w[j];
    if (r < space.dim()) out[r] += s * w[j];
  }
  return out;
}

}  // namespace

DiscreteField operator+(const DiscreteField& x, const DiscreteField& y) {
  require_same(x, y);
  return {x.space, x.coeffs + y.coeffs};
}

DiscreteField operator-(const DiscreteField& x, const DiscreteField& y) {
  require_same(x, y);
  return {x.space, x.coeffs - y.coeffs};
}

DiscreteField operator*(double s, const DiscreteField& x) { return {x.space, s * x.coeffs}; }

SpacePtr refinement_space(const SpacePtr& A, const SpacePtr& B) {
  if (A->same_as(*B)) return A;
  Mesh1D m = common_refinement(A->mesh(), B->mesh());
  if (m == A->mesh()) return A;
  if (m == B->mesh()) return B;
  return A->on_mesh(std::move(m));
}

SpacePtr intersection_space(const SpacePtr& A, const SpacePtr& B) {
  if (A->same_as(*B)) return A;
  Mesh1D m = common_coarsening(A->mesh(), B->mesh());
  if (m == A->mesh()) return A;
  if (m == B->mesh()) return B;
  return A->on_mesh(std::move(m));
}

DiscreteField combine(const std::vector<Term>& terms) {
  if (terms.empty()) throw ConfigError("empty combination");
  SpacePtr target = terms.front().field->space;
  for (const auto& t : terms) target = refinement_space(target, t.field->space);
  Vec out = Vec::Zero(target->dim());
  for (const auto& t : terms) {
    if (t.weight == 0.0) continue;
    if (t.field->space->same_as(*target)) {
      out += t.weight * t.field->coeffs;
    } else {
      out += t.weight * pass_operator(*t.field, target).coeffs;
    }
  }
  return {target, std::move(out)};
}

DiscreteField combine(std::initializer_list<Term> terms) {
  return combine(std::vector<Term>(terms));
}

DiscreteField l2_project(const SpacePtr& space, const SpaceFn& g) {
  const Mesh1D& mesh = space->mesh();
  Vec load = Vec::Zero(space->dim());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const double x0 = mesh.left(e);
    const double h = mesh.width(e);
    double il = 0.0;
    double ir = 0.0;
    const auto xs = quad::mapped_nodes<5>(x0, x0 + h);
    const auto ws = quad::mapped_weights<5>(x0, x0 + h);
    for (int q = 0; q < 5; ++q) {
      const double gv = g(xs[q]);
      if (!std::isfinite(gv)) throw DataError("non-finite value in projected function");
      const double s = (xs[q] - x0) / h;
      il += ws[q] * gv * (1.0 - s);
      ir += ws[q] * gv * s;
    }
    const auto l = static_cast<Eigen::Index>(e) - 1;
    const auto r = static_cast<Eigen::Index>(e);
    if (l >= 0) load[l] += il;
    if (r < space->dim()) load[r] += ir;
  }
  return {space, space->mass_solve(load)};
}

DiscreteField l2_project(const SpacePtr& space, const DiscreteField& g) {
  SpacePtr fine = refinement_space(space, g.space);
  const Vec g_fine = g.space->same_as(*fine) ? g.coeffs : pass_operator(g, fine).coeffs;
  const Vec w = fine->ops().mass_consistent.apply(g_fine);
  const Vec load = fine->same_as(*space) ? w : interpolation_transpose(*space, *fine, w);
  return {space, space->mass_solve(load)};
}

DiscreteField pass_operator(const DiscreteField& from, const SpacePtr& to_space) {
  if (!from.space->mesh().compatible_with(to_space->mesh())) {
    throw IncompatibleMeshError("pass operator between incompatible meshes");
  }
  if (from.space.get() == to_space.get()) return from;
  Vec out(to_space->dim());
  const auto& keys = to_space->mesh().keys();
  for (Eigen::Index i = 0; i < to_space->dim(); ++i) {
    out[i] = from.space->value_at_key(from.coeffs, keys[static_cast<std::size_t>(i) + 1]);
  }
  return {to_space, std::move(out)};
}

DiscreteField fine_interpolator(const DiscreteField& field) {
  Vec out = field.coeffs;
  const auto& mask = field.space->fine_dof_mask();
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) out[i] = 0.0;
  }
  return {field.space, std::move(out)};
}

DiscreteField fine_l2_project(const DiscreteField& field) {
  const FeSpace& space = *field.space;
  const auto& mask = space.fine_dof_mask();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < space.dim(); ++i)
    if (mask[static_cast<std::size_t>(i)]) idx.push_back(i);
  const Vec rhs_full = space.mass_apply(field.coeffs);
  const auto nf = static_cast<Eigen::Index>(idx.size());
  Tridiag sub(nf);
  Vec rhs(nf);
  const bool lumped = space.mass_mode() == MassMode::lumped;
  const auto& mc = space.ops().mass_consistent;
  for (Eigen::Index k = 0; k < nf; ++k) {
    const Eigen::Index i = idx[static_cast<std::size_t>(k)];
    rhs[k] = rhs_full[i];
    sub.diag[k] = lumped ? space.ops().mass_lumped[i] : mc.diag[i];
    if (!lumped && k > 0 && idx[static_cast<std::size_t>(k) - 1] == i - 1) sub.lower[k] = mc.lower[i];
    if (!lumped && k + 1 < nf && idx[static_cast<std::size_t>(k) + 1] == i + 1) sub.upper[k] = mc.upper[i];
  }
  const Vec xf = sub.solve(rhs);
  Vec out = Vec::Zero(space.dim());
  for (Eigen::Index k = 0; k < nf; ++k) out[idx[static_cast<std::size_t>(k)]] = xf[k];
  return {field.space, std::move(out)};
}

DiscreteField discrete_elliptic_apply(const DiscreteField& field) {
  const FeSpace& s = *field.space;
  return {field.space, s.mass_solve(s.ops().stiffness.apply(field.coeffs))};
}

DiscreteField lts_operator_apply(const DiscreteField& field, double tau) {
  DiscreteField a = discrete_elliptic_apply(field);
  if (tau == 0.0 || !field.space->has_fine_dofs()) return a;
  DiscreteField apa = discrete_elliptic_apply(fine_interpolator(a));
  return {field.space, a.coeffs - (tau * tau / 16.0) * apa.coeffs};
}

DiscreteField source_approx(const SpacePtr& space, const SpaceTimeFn& f, double t_n, double tau,
                            bool continuous) {
  if (!f) return DiscreteField::zero(space);
  if (continuous) return l2_project(space, [&](double x) { return f(x, t_n); });
  const auto ts = quad::mapped_nodes<3>(t_n - 0.5 * tau, t_n + 0.5 * tau);
  const auto ws = quad::mapped_weights<3>(t_n - 0.5 * tau, t_n + 0.5 * tau);
  return l2_project(space, [&](double x) {
    double s = 0.0;
    for (int q = 0; q < 3; ++q) s += ws[q] * f(x, ts[q]);
    return s / tau;
  });
}

double pivot_product(const DiscreteField& x, const DiscreteField& y) {
  if (x.space->same_as(*y.space)) {
    return x.coeffs.dot(x.space->ops().mass_consistent.apply(y.coeffs));
  }
  SpacePtr r = refinement_space(x.space, y.space);
  const DiscreteField xr = pass_operator(x, r);
  const DiscreteField yr = pass_operator(y, r);
  return xr.coeffs.dot(r->ops().mass_consistent.apply(yr.coeffs));
}

double pivot_norm(const DiscreteField& field) {
  return std::sqrt(std::max(0.0, pivot_product(field, field)));
}

double a_product(const DiscreteField& x, const DiscreteField& y) {
  if (x.space->same_as(*y.space)) return x.coeffs.dot(x.space->ops().stiffness.apply(y.coeffs));
  SpacePtr r = refinement_space(x.space, y.space);
  const DiscreteField xr = pass_operator(x, r);
  const DiscreteField yr = pass_operator(y, r);
  return xr.coeffs.dot(r->ops().stiffness.apply(yr.coeffs));
}

double potential_norm(const DiscreteField& field) {
  return std::sqrt(std::max(0.0, a_product(field, field)));
}

double energy_norm(const DiscreteField& u, const DiscreteField& v) {
  return std::hypot(potential_norm(u), pivot_norm(v));
}

namespace {

template <class F>
double piecewise_quadrature(const Mesh1D& mesh, F&& integrand) {
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const double x0 = mesh.left(e);
    const double h = mesh.width(e) / 4.0;
    for (int p = 0; p < 4; ++p) {
      s += quad::integrate<5>([&](double x) { return integrand(e, x); }, x0 + p * h,
                              x0 + (p + 1) * h);
    }
  }
  return s;
}

}  // namespace

double pivot_error(const DiscreteField& field, const SpaceFn& g) {
  const FeSpace& sp = *field.space;
  const Mesh1D& mesh = sp.mesh();
  const double s = piecewise_quadrature(mesh, [&](std::size_t e, double x) {
    const double t = (x - mesh.left(e)) / mesh.width(e);
    const double uh = (1.0 - t) * sp.node_value(field.coeffs, e) + t * sp.node_value(field.coeffs, e + 1);
    const double d = uh - g(x);
    return d * d;
  });
  return std::sqrt(s);
}

double potential_error(const DiscreteField& field, const SpaceFn& g_x) {
  const FeSpace& sp = *field.space;
  const double s = piecewise_quadrature(sp.mesh(), [&](std::size_t e, double x) {
    const double d = sp.wave_speed(e) * (sp.slope(field.coeffs, e) - g_x(x));
    return d * d;
  });
  return std::sqrt(s);
}

double analytic_pivot_norm(const Mesh1D& mesh, const SpaceFn& g) {
  return std::sqrt(piecewise_quadrature(mesh, [&](std::size_t, double x) {
    const double v = g(x);
    return v * v;
  }));
}

}  // namespace wave_apost
