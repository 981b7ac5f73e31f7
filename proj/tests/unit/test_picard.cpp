#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "pathfbsde/errors.hpp"
#include "pathfbsde/euler.hpp"
#include "pathfbsde/parallel.hpp"
#include "pathfbsde/picard.hpp"

using namespace pathfbsde;

namespace {

SchemeConfig regressionConfig(std::size_t n, std::size_t m, std::size_t samples, std::uint64_t seed) {
  SchemeConfig c;
  c.grid = TimeGrid::uniform(0.0, 1.0, n);
  c.iterations = m;
  c.samples = samples;
  c.seed = seed;
  return c;
}

const DiscretePath kZero = DiscretePath::constant(1, 0.0);

}  // namespace

TEST(Picard, ZeroIterationsReportsZero) {
  const CoefficientSet cs = problemZoo("discounted-terminal").coefficients;
  const SolveResult r = solvePicard(cs, kZero, regressionConfig(4, 0, 100, 1));
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.y0, 0.0);
  EXPECT_EQ(r.z0, std::vector<double>{0.0});
}

TEST(Picard, DriverFreeProblemIsFixedAfterOneIteration) {
  const Problem p = problemZoo("abm-linear");
  const SchemeConfig c = regressionConfig(8, 3, 4000, 5);
  const SchemeIterate first = picardStep(SchemeIterate::initial(p.coefficients, c), p.coefficients, kZero, c);
  const SchemeIterate second = picardStep(first, p.coefficients, kZero, c);
  EXPECT_EQ(first.start().y0, second.start().y0);
  EXPECT_EQ(first.start().z0, second.start().z0);
  ASSERT_EQ(first.surfaces().size(), second.surfaces().size());
  for (std::size_t i = 0; i < first.surfaces().size(); ++i) {
    EXPECT_EQ(first.surfaces()[i].beta, second.surfaces()[i].beta) << i;
  }
  const double ref = p.reference.valueAt(0.0, kZero);
  EXPECT_NEAR(second.start().y0, ref, 4.0 * second.start().y0StdError + 1e-12);
  EXPECT_NEAR(second.start().z0[0], 2.0, 4.0 * second.start().z0StdError[0]);
}

TEST(Picard, TraceEntriesMatchShorterRuns) {
  const CoefficientSet cs = problemZoo("z-driver").coefficients;
  const SolveResult longRun = solvePicard(cs, kZero, regressionConfig(8, 4, 3000, 2));
  const SolveResult shortRun = solvePicard(cs, kZero, regressionConfig(8, 2, 3000, 2));
  ASSERT_EQ(longRun.trace.size(), 5u);
  EXPECT_EQ(longRun.trace[2].y0, shortRun.y0);
  EXPECT_EQ(longRun.trace[2].z0, shortRun.z0);
}

TEST(Picard, ResultsDoNotDependOnThreadCount) {
  const CoefficientSet cs = problemZoo("discounted-terminal").coefficients;
  const SchemeConfig c = regressionConfig(8, 3, 9000, 4);
  setThreadCount(1);
  const SolveResult a = solvePicard(cs, kZero, c);
  setThreadCount(3);
  const SolveResult b = solvePicard(cs, kZero, c);
  setThreadCount(0);
  EXPECT_EQ(a.y0, b.y0);
  EXPECT_EQ(a.z0, b.z0);
}

TEST(Picard, ConvergesToDiscountedValue) {
  const Problem p = problemZoo("discounted-terminal");
  const SolveResult r = solvePicard(p.coefficients, kZero, regressionConfig(32, 8, 20000, 7));
  const double ref = std::exp(-0.5);
  EXPECT_NEAR(r.y0, ref, 4.0 * r.y0StdError + 0.02);
  EXPECT_NEAR(r.z0[0], ref, 4.0 * r.z0StdError[0] + 0.02);
}

TEST(Picard, FreshPathsAndAntitheticRun) {
  const CoefficientSet cs = problemZoo("bm-terminal").coefficients;
  SchemeConfig c = regressionConfig(8, 2, 2000, 3);
  c.freshPaths = true;
  c.antithetic = true;
  const SolveResult r = solvePicard(cs, kZero, c);
  EXPECT_NEAR(r.y0, 0.0, 1e-12);  // antithetic pairs cancel the terminal exactly
  EXPECT_NEAR(r.z0[0], 1.0, 4.0 * r.z0StdError[0]);
}

TEST(Picard, NestedMatchesFirstIterate) {
  const CoefficientSet cs = problemZoo("discounted-terminal").coefficients;
  SchemeConfig c = regressionConfig(4, 2, 400, 8);
  c.estimator.kind = EstimatorKind::kNested;
  c.estimator.innerSamples = 16;
  const SolveResult r = solvePicard(cs, kZero, c);
  ASSERT_EQ(r.trace.size(), 3u);
  // Y^1 = E[X(T) + c] = 1; Y^2 = E[g - r sum_{j<n} Y^1(t_j) h] = 1 - 0.5.
  EXPECT_NEAR(r.trace[1].y0, 1.0, 4.0 * r.trace[1].y0StdError);
  EXPECT_NEAR(r.trace[2].y0, 0.5, 4.0 * r.trace[2].y0StdError);
}

TEST(Picard, NestedIterateIsDeterministicPerKey) {
  const CoefficientSet cs = problemZoo("z-driver").coefficients;
  SchemeConfig c = regressionConfig(4, 2, 10, 1);
  c.estimator.kind = EstimatorKind::kNested;
  c.estimator.innerSamples = 8;
  SchemeIterate it = SchemeIterate::initial(cs, c);
  it = picardStep(it, cs, kZero, c);
  it = picardStep(it, cs, kZero, c);
  const DiscretePath prefix = simulate(cs, kZero, c.grid, SampleKey(3)).path;
  EXPECT_EQ(it.y(2, prefix, SampleKey(9)), it.y(2, prefix, SampleKey(9)));
  EXPECT_NE(it.y(2, prefix, SampleKey(9)), it.y(2, prefix, SampleKey(10)));
  EXPECT_EQ(it.z(4, prefix, SampleKey(9)), std::vector<double>{0.0});
  EXPECT_THROW(it.y(5, prefix, SampleKey(9)), std::out_of_range);
}

TEST(Picard, ConfigurationErrors) {
  const CoefficientSet cs = problemZoo("bm-terminal").coefficients;
  SchemeConfig nested = regressionConfig(4, 4, 10, 1);
  nested.estimator.kind = EstimatorKind::kNested;
  EXPECT_THROW(solvePicard(cs, kZero, nested), std::invalid_argument);  // m > 3
  nested.iterations = 2;
  nested.grid = TimeGrid::uniform(0.0, 1.0, 17);
  EXPECT_THROW(solvePicard(cs, kZero, nested), std::invalid_argument);  // n > 16
  nested.grid = TimeGrid::uniform(0.0, 1.0, 4);
  nested.estimator.innerSamples = 257;
  EXPECT_THROW(solvePicard(cs, kZero, nested), std::invalid_argument);
  nested.estimator.innerSamples = 8;
  EXPECT_THROW(solveImplicit(cs, kZero, nested), std::invalid_argument);

  EXPECT_THROW(solvePicard(cs, DiscretePath::constant(2, 0.0), regressionConfig(4, 1, 10, 1)),
               std::invalid_argument);
  EXPECT_THROW(solvePicard(cs, DiscretePath::constant(1, 0.0, 0.5), regressionConfig(4, 1, 10, 1)),
               std::invalid_argument);
  EXPECT_THROW(parseEstimator("lstsq"), std::invalid_argument);
  EXPECT_EQ(parseEstimator("nested"), EstimatorKind::kNested);
}

TEST(Implicit, MatchesBackwardEulerDiscount) {
  // y_i = E[y_{i+1}] - r h y_i, so Y0 = E[X(T) + c] / (1 + r h)^n.
  const CoefficientSet cs = problemZoo("discounted-terminal").coefficients;
  const std::size_t n = 16;
  const SolveResult r = solveImplicit(cs, kZero, regressionConfig(n, 0, 20000, 3));
  const double oracle = 1.0 / std::pow(1.0 + 0.5 / n, static_cast<double>(n));
  EXPECT_EQ(r.method, "implicit");
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_NEAR(r.y0, oracle, 4.0 * r.y0StdError);
  EXPECT_NEAR(r.z0[0], std::pow(1.0 + 0.5 / n, -static_cast<double>(n - 1)) / (1.0 + 0.5 / n),
              4.0 * r.z0StdError[0] + 0.02);
}

TEST(Implicit, OneStepTargetAgrees) {
  const CoefficientSet cs = problemZoo("discounted-terminal").coefficients;
  SchemeConfig c = regressionConfig(8, 0, 20000, 3);
  const SolveResult multi = solveImplicit(cs, kZero, c);
  c.estimator.implicitTarget = ImplicitTarget::kOneStep;
  const SolveResult one = solveImplicit(cs, kZero, c);
  EXPECT_NEAR(multi.y0, one.y0, 4.0 * (multi.y0StdError + one.y0StdError));
}

TEST(Implicit, RefusesLargeStepsAndReportsNonConvergence) {
  CoefficientSet cs = problemZoo("discounted-terminal", {{"r", 8.0}}).coefficients;
  EXPECT_THROW(solveImplicit(cs, kZero, regressionConfig(4, 0, 100, 1)), std::invalid_argument);

  // Declared constant too small for the actual driver: the fixed point map
  // has factor 10 h = 2.5 and diverges.
  cs.driver = [](double, const StoppedView&, double y, std::span<const double>) { return -10.0 * y; };
  cs.lipschitz.driver = 0.1;
  try {
    solveImplicit(cs, kZero, regressionConfig(4, 0, 100, 1));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("time index 3"), std::string::npos) << e.what();
  }
}

TEST(Picard, NonFiniteDriverIsReported) {
  CoefficientSet cs = problemZoo("bm-terminal").coefficients;
  cs.driver = [](double, const StoppedView&, double, std::span<const double>) { return std::nan(""); };
  try {
    solvePicard(cs, kZero, regressionConfig(4, 1, 100, 1));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("driver"), std::string::npos) << e.what();
  }
}

TEST(Ppde, EvaluatesAfterHistory) {
  const Problem p = problemZoo("bm-lookback");
  // History rises to 1.2 and falls back to 0.4 at t = 0.5.
  const DiscretePath history(1, {0.0, 0.25}, {0.0, 1.2}, {0.5}, {0.4});
  SchemeConfig c = regressionConfig(1, 1, 40000, 6);
  c.grid = TimeGrid::uniform(0.5, 1.0, 64);
  const PpdeValue u = evaluatePPDE(p.coefficients, history, c);
  EXPECT_EQ(u.t, 0.5);
  EXPECT_NEAR(u.value, p.reference.valueAt(0.5, history), 4.0 * u.stdError + p.reference.tolerance);
  EXPECT_GE(u.value, 1.2);
}
