#include <gtest/gtest.h>

#include "htmrl/sdr.hpp"

#include <stdexcept>
#include <vector>

using htmrl::CategoryEncoder;
using htmrl::CategoryEncoderConfig;
using htmrl::Sdr;

TEST(Sdr, ValidateAcceptsWellFormed) {
  Sdr sdr{10, {0, 3, 9}};
  EXPECT_NO_THROW(sdr.validate());
  EXPECT_EQ(sdr.popcount(), 3);
  EXPECT_DOUBLE_EQ(sdr.active_fraction(), 0.3);
  EXPECT_TRUE(sdr.contains(3));
  EXPECT_FALSE(sdr.contains(4));
}

TEST(Sdr, ValidateRejectsOutOfRangeAndUnsorted) {
  EXPECT_THROW((Sdr{4, {0, 4}}.validate()), std::invalid_argument);
  EXPECT_THROW((Sdr{4, {2, 1}}.validate()), std::invalid_argument);
  EXPECT_THROW((Sdr{4, {1, 1}}.validate()), std::invalid_argument);
  EXPECT_THROW((Sdr{0, {}}.validate()), std::invalid_argument);
}

// 20 states at 20 bits each: width 400, state 0 owns the first block.
TEST(CategoryEncoder, TwentyStatesTwentyBits) {
  CategoryEncoder enc({20, 20});
  EXPECT_EQ(enc.width(), 400);
  const Sdr sdr = enc.encode(0);
  EXPECT_EQ(sdr.width, 400);
  ASSERT_EQ(sdr.popcount(), 20);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(sdr.enabled[static_cast<std::size_t>(i)], i);
}

// Single state represented by 6 enabled bits.
TEST(CategoryEncoder, SingleStateSixBits) {
  CategoryEncoder enc({1, 6});
  const Sdr sdr = enc.encode(0);
  EXPECT_EQ(sdr.width, 6);
  EXPECT_EQ(sdr.enabled, (std::vector<int>{0, 1, 2, 3, 4, 5}));
}

// Degenerate single-bit encoder.
TEST(CategoryEncoder, SingleBit) {
  CategoryEncoder enc({1, 1});
  const Sdr sdr = enc.encode(0);
  EXPECT_EQ(sdr.width, 1);
  EXPECT_EQ(sdr.enabled, (std::vector<int>{0}));
}

TEST(CategoryEncoder, BlockPlacement) {
  CategoryEncoder enc({5, 3});
  const Sdr sdr = enc.encode(2);
  EXPECT_EQ(sdr.enabled, (std::vector<int>{6, 7, 8}));
  EXPECT_NO_THROW(sdr.validate());
}

TEST(CategoryEncoder, StateOutOfRangeThrows) {
  CategoryEncoder enc({4, 5});
  EXPECT_THROW(enc.encode(-1), std::out_of_range);
  EXPECT_THROW(enc.encode(4), std::out_of_range);
}

TEST(CategoryEncoder, ConfigValidation) {
  EXPECT_THROW(CategoryEncoder({0, 5}), std::invalid_argument);
  EXPECT_THROW(CategoryEncoder({5, 0}), std::invalid_argument);
}

// Distinct categories never share bits, and every encoding has exactly
// bits_per_category enabled.
TEST(CategoryEncoder, DisjointBlocksAcrossAllPairs) {
  CategoryEncoder enc({17, 7});
  std::vector<Sdr> all;
  for (int s = 0; s < 17; ++s) {
    all.push_back(enc.encode(s));
    EXPECT_EQ(all.back().popcount(), 7);
    EXPECT_NO_THROW(all.back().validate());
  }
  for (int a = 0; a < 17; ++a) {
    for (int b = a + 1; b < 17; ++b) {
      for (int bit : all[static_cast<std::size_t>(a)].enabled) {
        EXPECT_FALSE(all[static_cast<std::size_t>(b)].contains(bit))
            << "states " << a << " and " << b << " share bit " << bit;
      }
    }
  }
}

TEST(CategoryEncoder, Deterministic) {
  CategoryEncoder enc({9, 4});
  for (int s = 0; s < 9; ++s) {
    EXPECT_EQ(enc.encode(s).enabled, enc.encode(s).enabled);
  }
}
