#include <gtest/gtest.h>

#include <cmath>

#include "pathfbsde/coefficients.hpp"
#include "pathfbsde/errors.hpp"
#include "pathfbsde/euler.hpp"
#include "pathfbsde/parallel.hpp"

using namespace pathfbsde;

TEST(Euler, ArithmeticBrownianMotionIsExact) {
  // X = x + mu t + s0 W exactly, on any grid.
  const CoefficientSet cs = problemZoo("abm-linear").coefficients;
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 16);
  const auto traj = simulate(cs, DiscretePath::constant(1, 1.0), grid, SampleKey(5).child(0));
  double w = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(traj.path.nodeValue(i)[0], 1.0 + 0.5 * grid[i] + 2.0 * w, 1e-12);
    if (i < grid.steps()) w += traj.increments[i];
  }
}

TEST(Euler, StrongErrorVanishesForAdditiveNoise) {
  const CoefficientSet cs = problemZoo("abm-linear").coefficients;
  const double err = strongError(cs, DiscretePath::constant(1, 0.0), TimeGrid::uniform(0.0, 1.0, 4),
                                 TimeGrid::uniform(0.0, 1.0, 64), 200, 3);
  EXPECT_LT(err, 1e-24);
}

TEST(Euler, StrongErrorShrinksWithMesh) {
  const CoefficientSet cs = problemZoo("path-sigma").coefficients;
  const TimeGrid fine = TimeGrid::uniform(0.0, 1.0, 256);
  const DiscretePath h = DiscretePath::constant(1, 0.0);
  const double coarse = strongError(cs, h, TimeGrid::uniform(0.0, 1.0, 4), fine, 2000, 9);
  const double finer = strongError(cs, h, TimeGrid::uniform(0.0, 1.0, 32), fine, 2000, 9);
  EXPECT_GT(coarse, 0.0);
  EXPECT_LT(finer, coarse);
  EXPECT_THROW(strongError(cs, h, TimeGrid::uniform(0.0, 1.0, 3), fine, 2000, 9), std::invalid_argument);
  EXPECT_THROW(strongError(cs, h, TimeGrid::uniform(0.0, 1.0, 4), fine, 10, 9), std::invalid_argument);
}

TEST(Euler, SummaryMatchesBrownianLaw) {
  const CoefficientSet cs = problemZoo("abm-linear").coefficients;
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 4);
  const std::size_t n = 20000;
  const auto nodes = summarize(cs, DiscretePath::constant(1, 0.0), grid, n, 4);
  ASSERT_EQ(nodes.size(), 5u);
  for (const auto& node : nodes) {
    const double var = 4.0 * node.time;
    EXPECT_NEAR(node.mean[0], 0.5 * node.time, 5.0 * std::sqrt(var / n) + 1e-12);
    EXPECT_NEAR(node.variance[0], var, 5.0 * var * std::sqrt(2.0 / n) + 1e-12);
  }
}

TEST(Euler, MomentBoundStableAcrossMesh) {
  const CoefficientSet cs = problemZoo("path-sigma").coefficients;
  const DiscretePath h = DiscretePath::constant(1, 1.0);
  const double a = supSquaredMoment(cs, h, TimeGrid::uniform(0.0, 1.0, 8), 20000, 1).mean;
  const double b = supSquaredMoment(cs, h, TimeGrid::uniform(0.0, 1.0, 64), 20000, 1).mean;
  const double bound = 1.0 + h.supNorm() * h.supNorm();
  EXPECT_LT(a / bound, 2.0);
  EXPECT_LT(b / bound, 2.0);
  EXPECT_NEAR(a / b, 1.0, 0.2);
}

TEST(Euler, HistoryIsKept) {
  const CoefficientSet cs = problemZoo("bm-lookback").coefficients;
  const DiscretePath history(1, {0.0, 0.2}, {0.0, 3.0}, {0.5}, {1.0});
  const auto traj = simulate(cs, history, TimeGrid::uniform(0.5, 1.0, 8), SampleKey(1));
  EXPECT_EQ(traj.path.evaluate(0.3)[0], 3.0);
  EXPECT_EQ(traj.path.nodeValue(0)[0], 1.0);
  EXPECT_GE(cs.terminal(traj.path), 3.0);
}

TEST(Euler, NonFiniteCoefficientNamesFunctional) {
  CoefficientSet cs = problemZoo("bm-terminal").coefficients;
  cs.diffusion = [](double t, const StoppedView&, std::span<double> out) {
    out[0] = t > 0.4 ? std::nan("") : 1.0;
  };
  try {
    simulate(cs, DiscretePath::constant(1, 0.0), TimeGrid::uniform(0.0, 1.0, 4), SampleKey(1));
    FAIL();
  } catch (const NumericalError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("diffusion"), std::string::npos);
    EXPECT_NE(what.find("time index 2"), std::string::npos);
  }
}

TEST(Euler, ThreadCountDoesNotChangeResults) {
  const CoefficientSet cs = problemZoo("path-sigma").coefficients;
  const DiscretePath h = DiscretePath::constant(1, 0.0);
  setThreadCount(1);
  const double a = strongError(cs, h, TimeGrid::uniform(0.0, 1.0, 8), TimeGrid::uniform(0.0, 1.0, 64), 3000, 2);
  setThreadCount(4);
  const double b = strongError(cs, h, TimeGrid::uniform(0.0, 1.0, 8), TimeGrid::uniform(0.0, 1.0, 64), 3000, 2);
  setThreadCount(0);
  EXPECT_EQ(a, b);
}
