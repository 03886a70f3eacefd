#include <gtest/gtest.h>

#include <array>

#include "detbank/pyramid.hpp"
#include "test_support.hpp"

namespace detbank {
namespace {

std::vector<Region> regions_for(std::vector<std::uint32_t> levels) { return enumerate_regions(levels); }

TEST(EnumerateRegions, SingleLevelIsWholeImage) {
  auto r = regions_for({1});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].flat_index, 0u);
  EXPECT_EQ(r[0].x0, 0.0);
  EXPECT_EQ(r[0].y0, 0.0);
  EXPECT_EQ(r[0].x1, 1.0);
  EXPECT_EQ(r[0].y1, 1.0);
}

TEST(EnumerateRegions, DefaultPyramidHas21Cells) {
  auto r = regions_for({1, 2, 4});
  ASSERT_EQ(r.size(), 21u);
  EXPECT_EQ(r[0].subdivisions, 1u);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i].flat_index, i);
  // row-major inside each level
  EXPECT_EQ(r[2].level_index, 1u);
  EXPECT_EQ(r[2].row, 0u);
  EXPECT_EQ(r[2].col, 1u);
  EXPECT_EQ(r[3].row, 1u);
  EXPECT_EQ(r[3].col, 0u);
  EXPECT_EQ(r[5].subdivisions, 4u);
  EXPECT_EQ(r[20].row, 3u);
  EXPECT_EQ(r[20].col, 3u);
}

TEST(EnumerateRegions, ThirdsLevel) {
  auto r = regions_for({1, 3});
  ASSERT_EQ(r.size(), 10u);
  for (std::size_t i = 1; i < r.size(); ++i) {
    EXPECT_NEAR(r[i].x1 - r[i].x0, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(r[i].y1 - r[i].y0, 1.0 / 3.0, 1e-15);
  }
  EXPECT_EQ(r[9].x1, 1.0);
}

TEST(EnumerateRegions, RejectsEmptyOrZeroLevels) {
  EXPECT_THROW(regions_for({}), Error);
  EXPECT_THROW(regions_for({1, 0}), Error);
}

TEST(RegionMembership, CenterOfImage) {
  auto r = regions_for({1, 2, 4});
  // (1,1) of 2x2 is flat 1 + 3 = 4; (2,2) of 4x4 is 5 + 10 = 15
  EXPECT_EQ(region_membership({0.5, 0.5}, r), (std::vector<std::size_t>{0, 4, 15}));
}

TEST(RegionMembership, Corners) {
  auto r = regions_for({1, 2, 4});
  EXPECT_EQ(region_membership({0.0, 0.0}, r), (std::vector<std::size_t>{0, 1, 5}));
  EXPECT_EQ(region_membership({1.0, 1.0}, r), (std::vector<std::size_t>{0, 4, 20}));
  EXPECT_EQ(region_membership({1.0, 0.0}, r), (std::vector<std::size_t>{0, 2, 8}));
}

TEST(RegionMembership, RowFollowsVerticalAxis) {
  auto r = regions_for({1, 2, 4});
  // (0.3, 0.6): 2x2 row 1 col 0 -> 3; 4x4 row 2 col 1 -> 5 + 9 = 14
  EXPECT_EQ(region_membership({0.3, 0.6}, r), (std::vector<std::size_t>{0, 3, 14}));
}

TEST(RegionMembership, PartitionOnDenseGrid) {
  // Every sample, including every cell edge of each level, is claimed by
  // exactly one cell per level.
  for (auto levels : {std::vector<std::uint32_t>{1, 2, 4}, std::vector<std::uint32_t>{3, 5, 7}}) {
    auto r = regions_for(levels);
    Pyramid p(levels);
    std::array<std::size_t, 8> fast{};
    const int steps = 840;  // divisible by 2..8
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; j <= steps; j += 7) {
        const Point pt{static_cast<double>(i) / steps, static_cast<double>(j) / steps};
        std::vector<std::size_t> per_level(levels.size(), 0);
        for (const auto& reg : r)
          if (reg.contains(pt)) ++per_level[reg.level_index];
        for (auto c : per_level) ASSERT_EQ(c, 1u) << pt.x << "," << pt.y;
        p.membership(pt, std::span<std::size_t>(fast.data(), levels.size()));
        auto slow = region_membership(pt, r);
        ASSERT_EQ(slow.size(), levels.size());
        for (std::size_t l = 0; l < levels.size(); ++l) ASSERT_EQ(fast[l], slow[l]);
      }
    }
  }
}

TEST(Pyramid, FastLookupMatchesLinearScanOnRandomPoints) {
  Rng rng(21);
  std::vector<std::uint32_t> levels{1, 2, 3, 4, 6, 8};
  Pyramid p(levels);
  std::array<std::size_t, 6> fast{};
  for (int i = 0; i < 20000; ++i) {
    const Point pt{testing::random_coordinate(rng), testing::random_coordinate(rng)};
    p.membership(pt, fast);
    auto slow = region_membership(pt, p.regions());
    ASSERT_EQ(slow.size(), levels.size());
    for (std::size_t l = 0; l < levels.size(); ++l) ASSERT_EQ(fast[l], slow[l]);
  }
}

TEST(Pyramid, StableAcrossConstructions) {
  EXPECT_EQ(Pyramid({1, 2, 4}).regions(), Pyramid({1, 2, 4}).regions());
  EXPECT_EQ(Pyramid({1, 2, 4}).region_count(), 21u);
}

}  // namespace
}  // namespace detbank
