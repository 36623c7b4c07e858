#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "wave_apost/errors.hpp"
#include "wave_apost/mesh.hpp"

using namespace wave_apost;

namespace {

std::vector<double> widths(const Mesh1D& m) {
  std::vector<double> w;
  for (std::size_t e = 0; e < m.num_elements(); ++e) w.push_back(m.width(e));
  return w;
}

int count_fine(const Mesh1D& m) {
  int c = 0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) c += m.level(e) > 0;
  return c;
}

}  // namespace

TEST(BuildUniform, Examples) {
  EXPECT_EQ(build_uniform(-10, 10, 0.5).num_elements(), 40u);
  const Mesh1D m = build_uniform(0, 1, 0.25);
  const std::vector<double> expect{0, 0.25, 0.5, 0.75, 1};
  EXPECT_EQ(m.nodes(), expect);
  const Mesh1D r = build_uniform(0, 1, 0.3);
  ASSERT_EQ(r.num_elements(), 3u);
  for (double w : widths(r)) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(r.node(3), 1.0);
}

TEST(BuildUniform, Errors) {
  EXPECT_THROW(build_uniform(0, 1, 0.0), ConfigError);
  EXPECT_THROW(build_uniform(0, 1, -0.1), ConfigError);
  EXPECT_THROW(build_uniform(1, 0, 0.1), ConfigError);
}

TEST(WindowMesh, PulseSetup) {
  const Mesh1D m = build_window_mesh(-10, 10, 0.3, Interval{-1.9, 3.9});
  EXPECT_EQ(m.macro_count(), 67);
  const double H = 20.0 / 67.0;
  double lo = 1e9, hi = -1e9;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    if (m.level(e) == 1) {
      EXPECT_NEAR(m.width(e), H / 2, 1e-14);
      lo = std::min(lo, m.left(e));
      hi = std::max(hi, m.right(e));
    } else {
      EXPECT_NEAR(m.width(e), H, 1e-14);
    }
  }
  EXPECT_LE(lo, -1.9);
  EXPECT_GE(hi, 3.9);
  // fine block is contiguous and no more than one macro cell wider on each side
  EXPECT_GT(lo, -1.9 - H);
  EXPECT_LT(hi, 3.9 + H);
  const int fine = count_fine(m);
  EXPECT_NEAR((hi - lo) / (H / 2), fine, 1e-9);
}

TEST(WindowMesh, WholeAndEmptyWindow) {
  const Mesh1D all = build_window_mesh(0, 1, 4, Interval{0, 1});
  EXPECT_EQ(all.num_elements(), 8u);
  for (double w : widths(all)) EXPECT_NEAR(w, 0.125, 1e-15);
  const Mesh1D none = build_window_mesh(0, 1, 4, Interval{});
  EXPECT_EQ(none.num_elements(), 4u);
  for (double w : widths(none)) EXPECT_NEAR(w, 0.25, 1e-15);
}

TEST(WindowMesh, OutsideDomainIsError) {
  EXPECT_THROW(build_window_mesh(0, 1, 4, Interval{2, 3}), ConfigError);
}

TEST(AdvanceWindow, Examples) {
  const int count = 20;
  const double H = 1.0;
  const Mesh1D m = build_window_mesh(0, 20, count, Interval{4.2, 7.8});
  EXPECT_EQ(advance_window(m, Interval{4.2, 7.8}), m);

  const Mesh1D s = advance_window(m, Interval{4.2 + H, 7.8 + H});
  std::vector<int> lm, ls;
  for (std::size_t e = 0; e < m.num_elements(); ++e)
    if (m.level(e) == 1) lm.push_back(m.macro_of(e));
  for (std::size_t e = 0; e < s.num_elements(); ++e)
    if (s.level(e) == 1) ls.push_back(s.macro_of(e));
  ASSERT_EQ(lm.size(), ls.size());
  for (std::size_t i = 0; i < lm.size(); ++i) EXPECT_EQ(ls[i], lm[i] + 1);
  EXPECT_EQ(s.num_elements(), m.num_elements());

  const Mesh1D shrunk = advance_window(m, Interval{5.2, 7.8});
  EXPECT_EQ(shrunk.num_elements(), m.num_elements() - 1);
}

TEST(CommonMeshes, Refinement) {
  const Mesh1D A = build_window_mesh(0, 10, 10, Interval{1.2, 2.8});
  EXPECT_EQ(common_refinement(A, A), A);
  const Mesh1D coarse = build_uniform(0, 10, 1.0);
  const Mesh1D fine = refine_uniformly(coarse, 1);
  EXPECT_EQ(common_refinement(coarse, fine), fine);
  EXPECT_EQ(common_coarsening(coarse, fine), coarse);

  const Mesh1D B = build_window_mesh(0, 10, 10, Interval{6.2, 7.8});
  const Mesh1D U = common_refinement(A, B);
  for (std::size_t e = 0; e < U.num_elements(); ++e) {
    const int macro = U.macro_of(e);
    const bool in_window = (macro >= 1 && macro <= 2) || (macro >= 6 && macro <= 7);
    EXPECT_EQ(U.level(e), in_window ? 1 : 0) << "element " << e;
  }
  EXPECT_EQ(common_coarsening(A, B), coarse);
  EXPECT_TRUE(U.refines(A));
  EXPECT_TRUE(U.refines(B));
  EXPECT_FALSE(A.refines(B));
}

TEST(CommonMeshes, Incompatible) {
  const Mesh1D A = build_uniform(0, 1, 0.25);
  const Mesh1D B = build_uniform(0, 1, 1.0 / 3.0);
  EXPECT_FALSE(A.compatible_with(B));
  EXPECT_THROW(common_refinement(A, B), IncompatibleMeshError);
  EXPECT_THROW(common_coarsening(A, B), IncompatibleMeshError);
}

TEST(CoarseFineSplit, Examples) {
  EXPECT_FALSE(coarse_fine_split(build_uniform(0, 1, 0.1), 0.75).any_fine());
  EXPECT_FALSE(coarse_fine_split(build_uniform(0, 1, 1.0), 0.75).any_fine());

  const Mesh1D m = build_window_mesh(0, 10, 10, Interval{3.2, 5.8});
  const CoarseFineSplit s = coarse_fine_split(m, 0.75);
  std::size_t first_small = m.num_elements(), last_small = 0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    if (m.level(e) == 1) {
      first_small = std::min(first_small, e);
      last_small = std::max(last_small, e);
    }
  }
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const bool expect = e + 1 >= first_small && e <= last_small + 1;
    EXPECT_EQ(s.fine[e], expect) << "element " << e;
  }
  EXPECT_EQ(s.fine_elements().size(), last_small - first_small + 3);
}

TEST(CoarseFineSplit, ThetaRange) {
  const Mesh1D m = build_uniform(0, 1, 0.1);
  EXPECT_THROW(coarse_fine_split(m, 0.0), ConfigError);
  EXPECT_THROW(coarse_fine_split(m, 1.0), ConfigError);
}

TEST(Mesh1D, Locate) {
  const Mesh1D m = build_window_mesh(0, 4, 4, Interval{1.5, 2.5});
  EXPECT_EQ(m.locate(0.0), 0u);
  EXPECT_EQ(m.locate(1.2), 1u);
  EXPECT_EQ(m.locate(1.7), 2u);
  EXPECT_EQ(m.locate(4.0), m.num_elements() - 1);
  EXPECT_THROW(m.locate(4.5), RangeError);
}

TEST(Mesh1D, RejectsNonDyadicKeys) {
  const std::int64_t S = Mesh1D::kLevelScale;
  EXPECT_THROW(Mesh1D(0, 1, 1, {0, S / 3, S}), ConfigError);
  EXPECT_NO_THROW(Mesh1D(0, 1, 1, {0, S / 4, S / 2, S}));
}
