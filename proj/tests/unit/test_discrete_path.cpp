#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "pathfbsde/discrete_path.hpp"
#include "pathfbsde/path_json.hpp"

using namespace pathfbsde;

namespace {

// History 0 on [0, 0.2), 3 on [0.2, 0.5); nodes 1, -2, 0.5 at 0.5, 0.75, 1.
DiscretePath sample() {
  return DiscretePath(1, {0.0, 0.2}, {0.0, 3.0}, {0.5, 0.75, 1.0}, {1.0, -2.0, 0.5});
}

DiscretePath randomPath(std::mt19937_64& rng, double t0, std::size_t nodes) {
  std::normal_distribution<double> z;
  std::vector<double> times, values;
  for (std::size_t i = 0; i < nodes; ++i) {
    times.push_back(t0 + 0.1 * static_cast<double>(i));
    values.push_back(z(rng));
    values.push_back(z(rng));
  }
  return DiscretePath(2, {}, {}, times, values);
}

}  // namespace

TEST(DiscretePath, StepEvaluation) {
  const DiscretePath p = sample();
  EXPECT_EQ(p.evaluate(-1.0)[0], 0.0);
  EXPECT_EQ(p.evaluate(0.1)[0], 0.0);
  EXPECT_EQ(p.evaluate(0.2)[0], 3.0);
  EXPECT_EQ(p.evaluate(0.49)[0], 3.0);
  EXPECT_EQ(p.evaluate(0.5)[0], 1.0);
  EXPECT_EQ(p.evaluate(0.8)[0], -2.0);
  EXPECT_EQ(p.evaluate(5.0)[0], 0.5);
}

TEST(DiscretePath, PrefixStatisticsIncludeHistory) {
  const DiscretePath p = sample();
  EXPECT_EQ(p.runningSupNorm(0), 3.0);
  EXPECT_EQ(p.runningMax(0, 0), 3.0);
  EXPECT_EQ(p.runningMin(0, 0), 0.0);
  EXPECT_EQ(p.runningMin(1, 0), -2.0);
  EXPECT_EQ(p.supNorm(), 3.0);
  // Mean of node values only.
  EXPECT_DOUBLE_EQ(p.runningMean(1, 0), -0.5);
  EXPECT_DOUBLE_EQ(p.runningMean(2, 0), (1.0 - 2.0 + 0.5) / 3.0);
}

TEST(DiscretePath, StoppedViewFreezesAfterStop) {
  const DiscretePath p = sample();
  const StoppedView v(p, 0.6);
  EXPECT_EQ(v.current()[0], 1.0);
  EXPECT_EQ(v.value(0.9)[0], 1.0);
  EXPECT_EQ(v.value(0.3)[0], 3.0);
  EXPECT_EQ(v.runningSupNorm(), 3.0);
  EXPECT_EQ(v.runningMin(0), 0.0);
  ASSERT_TRUE(v.hasNode());
  EXPECT_EQ(v.node(), 0u);
  EXPECT_FALSE(StoppedView(p, 0.3).hasNode());
  EXPECT_EQ(StoppedView(p, 0.3).runningMax(0), 3.0);
}

TEST(DiscretePath, RejectsMalformedInput) {
  EXPECT_THROW(DiscretePath(1, {0.0, 0.6}, {0.0, 1.0}, {0.5}, {1.0}), std::invalid_argument);
  EXPECT_THROW(DiscretePath(1, {}, {}, {0.5, 0.5}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(DiscretePath(2, {}, {}, {0.5}, {1.0}), std::invalid_argument);
  EXPECT_THROW(DiscretePath(1, {}, {}, {}, {}), std::invalid_argument);
}

TEST(DiscretePath, ConcatContinuesWithIncrements) {
  const DiscretePath prefix(1, {}, {}, {0.0, 0.5, 1.0}, {1.0, 2.0, 9.0});
  const DiscretePath suffix(1, {}, {}, {0.0, 0.5, 0.75, 1.0}, {10.0, 10.0, 11.0, 13.0});
  const DiscretePath c = concat(prefix, suffix, 0.5);
  EXPECT_EQ(c.evaluate(0.0)[0], 1.0);
  EXPECT_EQ(c.evaluate(0.49)[0], 1.0);
  EXPECT_EQ(c.evaluate(0.5)[0], 2.0);
  EXPECT_EQ(c.evaluate(0.75)[0], 3.0);
  EXPECT_EQ(c.evaluate(1.0)[0], 5.0);
  EXPECT_THROW(concat(prefix, DiscretePath::constant(2, 0.0), 0.5), std::invalid_argument);
  EXPECT_THROW(concat(prefix, suffix, -0.1), std::invalid_argument);
}

TEST(DiscretePath, ConcatIdentities) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const DiscretePath a = randomPath(rng, 0.0, 11);
    const DiscretePath b = randomPath(rng, 0.0, 11);
    const double s = 0.1 * static_cast<double>(trial % 10);
    // omega (+)_s omega = omega.
    EXPECT_TRUE(pointwiseEqual(concat(a, a, s), a, 1e-12)) << "s=" << s;
    // Before s the concatenation is the prefix.
    const DiscretePath c = concat(a, b, s);
    for (double u = 0.0; u < s - 1e-12; u += 0.05) EXPECT_EQ(c.evaluate(u)[1], a.evaluate(u)[1]);
    // Increments after s are those of the suffix.
    EXPECT_NEAR(c.evaluate(1.0)[0] - c.evaluate(s)[0], b.evaluate(1.0)[0] - b.evaluate(s)[0], 1e-12);
  }
}

TEST(DiscretePath, DistanceMetricProperties) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const DiscretePath a = randomPath(rng, 0.0, 11), b = randomPath(rng, 0.0, 11), c = randomPath(rng, 0.0, 11);
    const StoppedView va(a, u(rng)), vb(b, u(rng)), vc(c, u(rng));
    EXPECT_EQ(dInfinity(va, va), 0.0);
    EXPECT_DOUBLE_EQ(dInfinity(va, vb), dInfinity(vb, va));
    EXPECT_LE(dInfinity(va, vc), dInfinity(va, vb) + dInfinity(vb, vc) + 1e-12);
    EXPECT_GE(dInfinity(va, vb), std::abs(va.stopTime() - vb.stopTime()));
  }
}

TEST(DiscretePath, SupDistanceIsExactForSteps) {
  const DiscretePath a(1, {}, {}, {0.0, 0.3, 1.0}, {0.0, 2.0, 1.0});
  const DiscretePath b(1, {}, {}, {0.0, 0.6, 1.0}, {0.0, 0.5, 1.0});
  // On [0.3, 0.6): |2 - 0| = 2.
  EXPECT_DOUBLE_EQ(supDistance(a.stoppedAt(1.0), b.stoppedAt(1.0)), 2.0);
  EXPECT_DOUBLE_EQ(supDistance(a.stoppedAt(0.2), b.stoppedAt(0.2)), 0.0);
}

TEST(DiscretePath, AsHistoryKeepsTheFunction) {
  const DiscretePath p = sample();
  const DiscretePath h = p.asHistory();
  EXPECT_EQ(h.nodeCount(), 1u);
  EXPECT_DOUBLE_EQ(h.startTime(), 1.0);
  EXPECT_TRUE(pointwiseEqual(p, h));
  EXPECT_EQ(h.runningMax(0, 0), 3.0);
  EXPECT_EQ(h.runningMin(0, 0), -2.0);
}

TEST(PathBuilder, StartsFromHistory) {
  const DiscretePath history = sample().asHistory();
  const TimeGrid grid = TimeGrid::uniform(1.0, 2.0, 4);
  PathBuilder b(history, grid);
  EXPECT_EQ(b.filled(), 1u);
  EXPECT_EQ(b.node(0)[0], 0.5);
  for (double v : {1.0, 4.0, -1.0, 0.0}) {
    const double x[] = {v};
    b.append(x);
  }
  EXPECT_TRUE(b.complete());
  EXPECT_EQ(b.path().runningMax(2, 0), 4.0);
  EXPECT_EQ(b.path().runningMin(3, 0), -2.0);
  EXPECT_EQ(b.path().evaluate(0.3)[0], 3.0);
  b.restart();
  EXPECT_EQ(b.filled(), 1u);
  EXPECT_THROW(PathBuilder(history, TimeGrid::uniform(0.5, 2.0, 4)), std::invalid_argument);
}

TEST(PathBuilder, ContinuesPrefix) {
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 4);
  const DiscretePath full(grid, {0.0, 1.0, 2.0, 3.0, 4.0}, 1);
  PathBuilder b(full, 2, grid);
  EXPECT_EQ(b.filled(), 2u);
  const double x[] = {-5.0};
  b.append(x);
  EXPECT_EQ(b.node(1)[0], 1.0);
  EXPECT_EQ(b.node(2)[0], -5.0);
  EXPECT_EQ(b.path().runningMin(2, 0), -5.0);
  EXPECT_EQ(b.path().runningMax(2, 0), 1.0);
  EXPECT_THROW(PathBuilder(full, 3, TimeGrid::uniform(0.0, 1.0, 3)), std::invalid_argument);
}

TEST(PathJson, RoundTrip) {
  const DiscretePath p = sample();
  const DiscretePath q = pathFromJson(toJson(p));
  EXPECT_TRUE(p == q);
  EXPECT_TRUE(pathFromJson(toJson(q, 2)) == p);
}

TEST(PathJson, GoldenFile) {
  const DiscretePath p = loadPath(std::string(PATHFBSDE_TEST_DATA) + "/lookback_history.json");
  EXPECT_EQ(p.dim(), 1u);
  EXPECT_EQ(p.historySize(), 4u);
  EXPECT_EQ(p.nodeCount(), 1u);
  EXPECT_DOUBLE_EQ(p.horizon(), 0.5);
  EXPECT_DOUBLE_EQ(p.terminal()[0], 1.0);
  EXPECT_DOUBLE_EQ(p.runningMax(0, 0), 2.0);
}

TEST(PathJson, RejectsMalformed) {
  EXPECT_THROW(pathFromJson("{"), std::invalid_argument);
  EXPECT_THROW(pathFromJson(R"({"d": 1, "grid": [0.0, 1.0], "values": [[1.0]]})"), std::invalid_argument);
  EXPECT_THROW(pathFromJson(R"({"d": 2, "grid": [0.0], "values": [[1.0]]})"), std::invalid_argument);
  EXPECT_THROW(pathFromJson(R"({"d": 1, "history": [[0.5, [1.0]]], "grid": [0.5], "values": [[1.0]]})"),
               std::invalid_argument);
}
