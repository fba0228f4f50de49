// Copyright 2026 The vlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "vlab/radix.hpp"

namespace vlab {
namespace {

TEST(Radix, CumulativeProducts) {
  RadixSequence r({2, 3, 2});
  EXPECT_EQ(r.cumulative(0), 1u);
  EXPECT_EQ(r.cumulative(1), 2u);
  EXPECT_EQ(r.cumulative(2), 6u);
  EXPECT_EQ(r.cumulative(3), 12u);
  EXPECT_EQ(r.size(), 12u);
  EXPECT_EQ(r.max_radix(), 3);
}

TEST(Radix, RejectsSmallDigit) { EXPECT_THROW(RadixSequence({2, 1}), PreconditionError); }

TEST(Radix, ToDigits) {
  RadixSequence r({2, 3, 2});
  EXPECT_EQ(r.to_digits(7), (Digits{1, 0, 1}));
  EXPECT_EQ(r.to_digits(0), (Digits{0, 0, 0}));
  EXPECT_EQ(r.to_digits(11), (Digits{1, 2, 1}));
  EXPECT_THROW(r.to_digits(12), PreconditionError);
}

TEST(Radix, RoundTripAllIndices) {
  for (const auto& r : {RadixSequence({2, 3, 2}), RadixSequence({5, 2, 3, 4}), RadixSequence::uniform(2, 6)}) {
    for (std::uint64_t n = 0; n < r.size(); ++n) {
      const Digits d = r.to_digits(n);
      EXPECT_EQ(r.from_digits(d), n);
      for (int k = 0; k < r.depth(); ++k) {
        EXPECT_GE(d[static_cast<std::size_t>(k)], 0);
        EXPECT_LT(d[static_cast<std::size_t>(k)], r.radix(k));
        EXPECT_EQ(r.digit(n, k), d[static_cast<std::size_t>(k)]);
      }
    }
  }
}

TEST(Radix, UpperZeroesLowDigits) {
  RadixSequence r({2, 3, 2});
  EXPECT_EQ(r.upper(11, 0), 11u);
  EXPECT_EQ(r.upper(11, 1), 10u);
  EXPECT_EQ(r.upper(11, 2), 6u);
  EXPECT_EQ(r.upper(11, 3), 0u);
}

TEST(Radix, TriangleAdd) {
  auto two = RadixSequence::uniform(2, 4);
  EXPECT_EQ(two.triangle_add(1, 1), 0u);
  EXPECT_EQ(two.triangle_add(1, 2), 3u);
  auto three = RadixSequence::uniform(3, 3);
  EXPECT_EQ(three.triangle_add(2, 2), 1u);
}

TEST(Radix, NegateIsGroupInverse) {
  RadixSequence r({2, 3, 4});
  for (std::uint64_t n = 0; n < r.size(); ++n) {
    EXPECT_EQ(r.triangle_add(n, r.negate(n)), 0u);
    EXPECT_EQ(r.negate(r.negate(n)), n);
  }
}

TEST(Radix, DoubledRadix) {
  RadixSequence r({2, 3});
  EXPECT_EQ(r.doubled().radices(), (std::vector<int>{2, 2, 3, 3}));
  EXPECT_EQ(r.doubled().size(), r.size() * r.size());
}

TEST(Radix, Parse) {
  EXPECT_EQ(RadixSequence::parse("2,3,2").radices(), (std::vector<int>{2, 3, 2}));
  EXPECT_THROW(RadixSequence::parse("2,x"), PreconditionError);
}

TEST(GroupPoints, AddAndAgreement) {
  RadixSequence r({2, 3, 2});
  GroupPoint a{{1, 2, 0}}, b{{1, 2, 1}};
  EXPECT_EQ(group_add(r, a, b).coords, (Digits{0, 1, 1}));
  EXPECT_EQ(agreement(r, point_index(r, a), point_index(r, b)), 2);
  EXPECT_EQ(agreement(r, 5, 5), 3);
  // Cube of F_1 containing t: all points with the same t_0.
  for (auto t : cube_points(r, 1, 1)) EXPECT_EQ(r.digit(t, 0), 1);
  EXPECT_EQ(cube_points(r, 1, 1).size(), 6u);
}

}  // namespace
}  // namespace vlab
