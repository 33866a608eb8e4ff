#include <gtest/gtest.h>

#include <set>

#include "gflm/random.hpp"

using namespace gflm;

// Known-answer vectors published with the Random123 distribution.
TEST(Philox, KnownAnswers) {
  const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(zero, (std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  const auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(ones, (std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  const auto pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(pi, (std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(PhiloxStream, ReproducibleAndDistinctStreams) {
  PhiloxStream a(2005, 3), b(2005, 3), c(2005, 4), d(2006, 3);
  std::set<std::uint32_t> seen;
  bool differs_c = false;
  bool differs_d = false;
  for (int k = 0; k < 64; ++k) {
    const auto va = a();
    EXPECT_EQ(va, b());
    differs_c |= va != c();
    differs_d |= va != d();
    seen.insert(va);
  }
  EXPECT_TRUE(differs_c);
  EXPECT_TRUE(differs_d);
  EXPECT_GT(seen.size(), 60u);
}

TEST(PhiloxStream, UniformInOpenInterval) {
  PhiloxStream s(1, 0);
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

TEST(PhiloxStream, BlocksFollowCounter) {
  PhiloxStream s(7, 9);
  const auto block0 = philox4x32({0, 0, 9, 0}, {7, 0});
  const auto block1 = philox4x32({1, 0, 9, 0}, {7, 0});
  for (int k = 0; k < 4; ++k) EXPECT_EQ(s(), block0[static_cast<std::size_t>(k)]);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(s(), block1[static_cast<std::size_t>(k)]);
}
