#include "wave_apost/mesh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <string>

#include "wave_apost/errors.hpp"

namespace wave_apost {

Mesh1D::Mesh1D(double a, double b, int macro_count, std::vector<std::int64_t> keys)
    : a_(a), b_(b), macro_count_(macro_count), keys_(std::move(keys)) {
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ConfigError("mesh needs a < b");
  }
  if (macro_count < 1) throw ConfigError("mesh needs at least one macro element");
  const std::int64_t total = static_cast<std::int64_t>(macro_count) * kLevelScale;
  if (keys_.size() < 2 || keys_.front() != 0 || keys_.back() != total) {
    throw ConfigError("mesh keys must span the macro partition");
  }
  for (std::size_t i = 0; i + 1 < keys_.size(); ++i) {
    const std::int64_t d = keys_[i + 1] - keys_[i];
    if (d <= 0) throw ConfigError("mesh keys must be strictly increasing");
    const auto ud = static_cast<std::uint64_t>(d);
    if (!std::has_single_bit(ud) || d > kLevelScale || keys_[i] % d != 0) {
      throw ConfigError("mesh element is not a dyadic descendant of a macro element");
    }
  }
}

double Mesh1D::coord_of_key(std::int64_t key) const {
  const std::int64_t total = static_cast<std::int64_t>(macro_count_) * kLevelScale;
  if (key == total) return b_;
  return a_ + (b_ - a_) * (static_cast<double>(key) / static_cast<double>(total));
}

std::vector<double> Mesh1D::nodes() const {
  std::vector<double> x(keys_.size());
  for (std::size_t i = 0; i < keys_.size(); ++i) x[i] = coord_of_key(keys_[i]);
  return x;
}

double Mesh1D::width(std::size_t e) const {
  const double d = static_cast<double>(keys_[e + 1] - keys_[e]);
  return macro_h() * d / static_cast<double>(kLevelScale);
}

int Mesh1D::level(std::size_t e) const {
  const auto d = static_cast<std::uint64_t>(keys_[e + 1] - keys_[e]);
  return kMaxLevel - std::countr_zero(d);
}

int Mesh1D::macro_of(std::size_t e) const {
  return static_cast<int>(keys_[e] / kLevelScale);
}

int Mesh1D::max_level() const {
  int l = 0;
  for (std::size_t e = 0; e < num_elements(); ++e) l = std::max(l, level(e));
  return l;
}

std::size_t Mesh1D::element_of_key(std::int64_t key) const {
  auto it = std::upper_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.begin()) throw RangeError("key before the mesh start");
  auto idx = static_cast<std::size_t>(std::distance(keys_.begin(), it)) - 1;
  if (idx >= num_elements()) {
    if (key == keys_.back()) return num_elements() - 1;
    throw RangeError("key after the mesh end");
  }
  return idx;
}

std::size_t Mesh1D::locate(double x) const {
  const double tol = 1e-14 * (b_ - a_);
  if (x < a_ - tol || x > b_ + tol) {
    throw RangeError("point " + std::to_string(x) + " outside the mesh");
  }
  const double s = (x - a_) / (b_ - a_) * static_cast<double>(macro_count_) *
                   static_cast<double>(kLevelScale);
  auto key = static_cast<std::int64_t>(std::floor(s));
  key = std::clamp<std::int64_t>(key, 0, keys_.back());
  return element_of_key(key);
}

bool Mesh1D::compatible_with(const Mesh1D& other) const {
  return a_ == other.a_ && b_ == other.b_ && macro_count_ == other.macro_count_;
}

bool Mesh1D::refines(const Mesh1D& coarser) const {
  if (!compatible_with(coarser)) return false;
  return std::includes(keys_.begin(), keys_.end(), coarser.keys_.begin(), coarser.keys_.end());
}

std::string Mesh1D::to_text() const {
  std::string out;
  char buf[40];
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\n", node(i));
    out += buf;
  }
  return out;
}

Mesh1D build_uniform(double a, double b, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("mesh size must be positive");
  if (!(b > a)) throw ConfigError("mesh needs a < b");
  const auto count = static_cast<int>(std::lround((b - a) / h));
  if (count < 1) throw ConfigError("mesh size larger than the domain");
  std::vector<std::int64_t> keys(static_cast<std::size_t>(count) + 1);
  for (int j = 0; j <= count; ++j) keys[static_cast<std::size_t>(j)] = j * Mesh1D::kLevelScale;
  return Mesh1D(a, b, count, std::move(keys));
}

Mesh1D build_window_mesh(double a, double b, int macro_count, Interval window) {
  if (!(b > a)) throw ConfigError("mesh needs a < b");
  if (macro_count < 1) throw ConfigError("mesh needs at least one macro element");
  const double tol = 1e-12 * (b - a);
  const bool empty = window.empty();
  if (!empty && (window.lo < a - tol || window.hi > b + tol)) {
    throw ConfigError("refinement window outside the domain");
  }
  const double H = (b - a) / macro_count;
  std::vector<std::int64_t> keys;
  keys.reserve(2 * static_cast<std::size_t>(macro_count) + 1);
  for (int j = 0; j < macro_count; ++j) {
    const std::int64_t k0 = j * Mesh1D::kLevelScale;
    keys.push_back(k0);
    const double left = a + j * H;
    const double right = a + (j + 1) * H;
    if (!empty && window.lo < right && window.hi > left) keys.push_back(k0 + Mesh1D::kLevelScale / 2);
  }
  keys.push_back(macro_count * Mesh1D::kLevelScale);
  return Mesh1D(a, b, macro_count, std::move(keys));
}

Mesh1D build_window_mesh(double a, double b, double H, Interval window) {
  if (!(H > 0.0) || !std::isfinite(H)) throw ConfigError("macro mesh size must be positive");
  const auto count = static_cast<int>(std::lround((b - a) / H));
  if (count < 1) throw ConfigError("macro mesh size larger than the domain");
  return build_window_mesh(a, b, count, window);
}

Mesh1D advance_window(const Mesh1D& mesh, Interval new_window) {
  return build_window_mesh(mesh.a(), mesh.b(), mesh.macro_count(), new_window);
}

Mesh1D refine_uniformly(const Mesh1D& mesh, int times) {
  if (times < 0) throw ConfigError("refinement count must be non-negative");
  if (mesh.max_level() + times > Mesh1D::kMaxLevel) throw ConfigError("refinement too deep");
  const std::int64_t parts = std::int64_t{1} << times;
  std::vector<std::int64_t> keys;
  keys.reserve(mesh.num_elements() * static_cast<std::size_t>(parts) + 1);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const std::int64_t k0 = mesh.keys()[e];
    const std::int64_t step = (mesh.keys()[e + 1] - k0) / parts;
    for (std::int64_t j = 0; j < parts; ++j) keys.push_back(k0 + j * step);
  }
  keys.push_back(mesh.keys().back());
  return Mesh1D(mesh.a(), mesh.b(), mesh.macro_count(), std::move(keys));
}

namespace {

void require_compatible(const Mesh1D& A, const Mesh1D& B) {
  if (!A.compatible_with(B)) {
    throw IncompatibleMeshError("meshes do not share a macro partition");
  }
}

}  // namespace

Mesh1D common_refinement(const Mesh1D& A, const Mesh1D& B) {
  require_compatible(A, B);
  std::vector<std::int64_t> keys;
  keys.reserve(A.num_nodes() + B.num_nodes());
  std::set_union(A.keys().begin(), A.keys().end(), B.keys().begin(), B.keys().end(),
                 std::back_inserter(keys));
  return Mesh1D(A.a(), A.b(), A.macro_count(), std::move(keys));
}

Mesh1D common_coarsening(const Mesh1D& A, const Mesh1D& B) {
  require_compatible(A, B);
  std::vector<std::int64_t> keys;
  std::set_intersection(A.keys().begin(), A.keys().end(), B.keys().begin(), B.keys().end(),
                        std::back_inserter(keys));
  return Mesh1D(A.a(), A.b(), A.macro_count(), std::move(keys));
}

std::vector<std::size_t> CoarseFineSplit::fine_elements() const {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < fine.size(); ++e)
    if (fine[e]) out.push_back(e);
  return out;
}

std::vector<std::size_t> CoarseFineSplit::coarse_elements() const {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < fine.size(); ++e)
    if (!fine[e]) out.push_back(e);
  return out;
}

bool CoarseFineSplit::any_fine() const {
  return std::find(fine.begin(), fine.end(), true) != fine.end();
}

CoarseFineSplit coarse_fine_split(const Mesh1D& mesh, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  const std::size_t ne = mesh.num_elements();
  double hmax = 0.0;
  for (std::size_t e = 0; e < ne; ++e) hmax = std::max(hmax, mesh.width(e));
  std::vector<bool> small(ne, false);
  for (std::size_t e = 0; e < ne; ++e) small[e] = mesh.width(e) <= theta * hmax * (1.0 + 1e-12);
  CoarseFineSplit split;
  split.fine = small;
  for (std::size_t e = 0; e < ne; ++e) {
    if (!small[e]) continue;
    if (e > 0) split.fine[e - 1] = true;
    if (e + 1 < ne) split.fine[e + 1] = true;
  }
  return split;
}

}  // namespace wave_apost
