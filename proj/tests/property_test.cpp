#include <gtest/gtest.h>

#include "properties.hpp"

namespace detbank::testing {
namespace {

constexpr std::size_t kCases = 10000;

class PropertyTest : public ::testing::TestWithParam<std::size_t> {};

TEST_P(PropertyTest, HoldsOnRandomInstances) {
  const auto props = all_properties();
  const auto& prop = props.at(GetParam());
  const auto out = run_property(prop.fn, kCases, 20240 + GetParam());
  EXPECT_TRUE(out.passed()) << prop.name << ": " << out.failure << " (seed " << out.failing_seed << ")";
  EXPECT_EQ(out.cases, kCases);
}

INSTANTIATE_TEST_SUITE_P(All, PropertyTest, ::testing::Range<std::size_t>(0, all_properties().size()),
                         [](const ::testing::TestParamInfo<std::size_t>& info) {
                           std::string name = all_properties().at(info.param).name;
                           for (auto& ch : name)
                             if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
                           return name;
                         });

TEST(RunProperty, ReportsTheFirstFailingSeed) {
  Property fails_when_large = [](Rng&, std::size_t size) { return size > 50 ? std::string("too big") : std::string(); };
  const auto out = run_property(fails_when_large, 100, 1);
  EXPECT_FALSE(out.passed());
  EXPECT_EQ(out.failure, "too big");
  EXPECT_EQ(out.cases, 51u);
  EXPECT_EQ(out.failing_seed, derive_seed(1, 0x9e37, 50));
}

}  // namespace
}  // namespace detbank::testing
