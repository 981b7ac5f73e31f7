#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "pathfbsde/philox.hpp"
#include "pathfbsde/sampling.hpp"

using namespace pathfbsde;

// Known-answer vectors of the Random123 reference implementation.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(SampleKey, DeterministicAndDistinct) {
  const SampleKey root(42);
  EXPECT_EQ(root.child(3).streamId(), SampleKey(42, {3}).streamId());
  EXPECT_TRUE(root.child(3) == SampleKey(42, {3}));
  std::set<std::uint64_t> ids;
  for (std::uint64_t i = 0; i < 200; ++i) {
    ids.insert(root.child(i).streamId());
    ids.insert(root.child(i).child(0).streamId());
    ids.insert(suffixKey(root, i, 0).streamId());
    ids.insert(SampleKey(i).streamId());
  }
  EXPECT_EQ(ids.size(), 800u);
  EXPECT_NE(suffixKey(root, 1, 2).streamId(), suffixKey(root, 2, 1).streamId());
}

TEST(Sampling, StreamOffsetsAreConsistent) {
  std::vector<double> full(16), part(7);
  fillStandardNormals(99, 0, full);
  fillStandardNormals(99, 5, part);
  for (std::size_t i = 0; i < part.size(); ++i) EXPECT_EQ(part[i], full[5 + i]);
}

TEST(Sampling, StandardNormalMoments) {
  const std::size_t n = 1 << 20;
  std::vector<double> z(n);
  fillStandardNormals(SampleKey(7).streamId(), 0, z);
  double s = 0, s2 = 0, s4 = 0;
  for (double x : z) {
    s += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  const double N = static_cast<double>(n);
  EXPECT_NEAR(s / N, 0.0, 5.0 / std::sqrt(N));
  EXPECT_NEAR(s2 / N, 1.0, 5.0 * std::sqrt(2.0 / N));
  EXPECT_NEAR(s4 / N, 3.0, 5.0 * std::sqrt(96.0 / N));
}

TEST(Sampling, StreamsAreUncorrelated) {
  const std::size_t n = 1 << 18;
  std::vector<double> a(n), b(n);
  fillStandardNormals(SampleKey(1).child(0).streamId(), 0, a);
  fillStandardNormals(SampleKey(1).child(1).streamId(), 0, b);
  double c = 0;
  for (std::size_t i = 0; i < n; ++i) c += a[i] * b[i];
  EXPECT_NEAR(c / static_cast<double>(n), 0.0, 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Sampling, IncrementsScaleWithStep) {
  const TimeGrid grid({0.0, 0.01, 1.0});
  const std::size_t n = 40000;
  double v0 = 0, v1 = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const auto inc = sampleIncrements(SampleKey(3).child(p), grid, 1);
    v0 += inc[0][0] * inc[0][0];
    v1 += inc[1][0] * inc[1][0];
  }
  EXPECT_NEAR(v0 / n, 0.01, 5 * 0.01 * std::sqrt(2.0 / n));
  EXPECT_NEAR(v1 / n, 0.99, 5 * 0.99 * std::sqrt(2.0 / n));
}

TEST(Sampling, AntitheticPairsNegate) {
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 8);
  std::vector<double> a(16), b(16), plain(16);
  fillOuterIncrements(SampleKey(5), 6, true, grid, 2, a);
  fillOuterIncrements(SampleKey(5), 7, true, grid, 2, b);
  fillOuterIncrements(SampleKey(5), 3, false, grid, 2, plain);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], -b[i]);
    EXPECT_EQ(a[i], plain[i]);
  }
}

TEST(Sampling, RejectsShapeMismatch) {
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 4);
  std::vector<double> out(3);
  EXPECT_THROW(fillIncrements(SampleKey(1), grid, 1, out), std::invalid_argument);
  EXPECT_THROW(fillIncrements(SampleKey(1), grid, 0, out), std::invalid_argument);
}
