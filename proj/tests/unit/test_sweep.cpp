#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "pathfbsde/sweep.hpp"

using namespace pathfbsde;

namespace {

SweepSpec smallSpec() {
  SweepSpec s;
  s.problem = "discounted-terminal";
  s.steps = {4, 8};
  s.iterations = {1, 3};
  s.samples = 2000;
  s.seed = 5;
  return s;
}

ConvergenceRecord record(std::size_t n, std::size_t m, double sqErr) {
  ConvergenceRecord r;
  r.problem = "synthetic";
  r.n = n;
  r.mesh = 1.0 / static_cast<double>(n);
  r.m = m;
  r.sqErr = sqErr;
  r.reference = 1.0;
  return r;
}

}  // namespace

TEST(RateFit, RecoversPowerLaw) {
  std::vector<ConvergenceRecord> rs;
  for (std::size_t n : {8, 16, 32, 64}) rs.push_back(record(n, 4, 3.0 / static_cast<double>(n)));
  const RateFit fit = fitRate(rs, RateAxis::kMesh);
  EXPECT_NEAR(fit.slope, 1.0, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
  EXPECT_NEAR(fit.slopeCi, 0.0, 1e-9);
}

TEST(RateFit, PicardRatioAndNoiseFloor) {
  std::vector<ConvergenceRecord> rs;
  for (std::size_t m = 1; m <= 6; ++m) rs.push_back(record(64, m, std::pow(0.5, static_cast<double>(m))));
  rs.push_back(record(64, 7, 1e-30));  // below the floor
  rs.push_back(record(64, 8, 1e-2));   // after the decreasing run ends
  rs.push_back(record(32, 1, 1e5));    // other column ignored
  const RateFit fit = fitRate(rs, RateAxis::kPicard);
  EXPECT_EQ(fit.points.size(), 6u);
  EXPECT_NEAR(fit.slope, std::log(0.5), 1e-12);
  EXPECT_NEAR(fit.ratio(), 0.5, 1e-12);

  FitOptions strict;
  strict.noiseFloor = 0.1;
  EXPECT_EQ(fitRate(rs, RateAxis::kPicard, strict).points.size(), 3u);
}

TEST(RateFit, RowOrderDoesNotMatter) {
  std::vector<ConvergenceRecord> rs;
  for (std::size_t n : {8, 16, 32, 64, 128}) {
    rs.push_back(record(n, 2, std::pow(1.0 / n, 1.1) * (1.0 + 0.1 * std::sin(static_cast<double>(n)))));
  }
  const RateFit a = fitRate(rs, RateAxis::kMesh);
  std::reverse(rs.begin(), rs.end());
  std::swap(rs[1], rs[3]);
  const RateFit b = fitRate(rs, RateAxis::kMesh);
  EXPECT_EQ(a.slope, b.slope);
  EXPECT_EQ(a.r2, b.r2);
}

TEST(RateFit, StudentTHalfWidthMatchesIndependentComputation) {
  // y = x + e with residuals (+1, -1, -1, +1) around x = 0..3.
  const std::vector<RatePoint> pts{{0, 1}, {1, 0}, {2, 1}, {3, 4}};
  const RateFit fit = fitPoints(pts, RateAxis::kMesh);
  // OLS: slope 1, intercept 0.5; residuals 0.5, -1.5, -1.5... computed directly below.
  double sres = 0.0;
  for (const auto& p : pts) {
    const double r = p.y - (fit.intercept + fit.slope * p.x);
    sres += r * r;
  }
  const double t975 = 4.302652729911275;  // two-sided 95% for 2 degrees of freedom
  EXPECT_NEAR(fit.slopeCi, t975 * std::sqrt(sres / 2.0 / 5.0), 1e-9);
  EXPECT_NEAR(fit.slope, 1.0, 1e-12);
}

TEST(RateFit, TooFewPointsThrows) {
  std::vector<ConvergenceRecord> rs{record(8, 1, 0.1), record(16, 1, 0.05)};
  EXPECT_THROW(fitRate(rs, RateAxis::kMesh), std::invalid_argument);
  EXPECT_THROW(parseRateAxis("time"), std::invalid_argument);
}

TEST(Sweep, CellsMatchStandaloneRunsBitForBit) {
  const SweepSpec spec = smallSpec();
  const auto records = runSweep(spec);
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[0].n, 4u);
  EXPECT_EQ(records[1].m, 3u);
  for (const auto& r : records) {
    ASSERT_FALSE(r.failed()) << r.error;
    const ConvergenceRecord alone = runCell(spec, r.n, r.m);
    EXPECT_EQ(alone.y0, r.y0);
    EXPECT_EQ(alone.z0, r.z0);
    EXPECT_EQ(alone.sqErr, r.sqErr);
    EXPECT_DOUBLE_EQ(r.reference, std::exp(-0.5));
    EXPECT_EQ(r.sqErr, (r.y0 - r.reference) * (r.y0 - r.reference));
  }
}

TEST(Sweep, CsvRoundTripIsExact) {
  const auto records = runSweep(smallSpec());
  std::stringstream ss;
  writeRecordsCsv(ss, records);
  const std::string header = ss.str().substr(0, ss.str().find('\n'));
  EXPECT_EQ(header, "problem,n,mesh,m,N,estimator,seed,y0,y0_stderr,z0_0,ref,sq_err,wall_ms");
  const auto back = readRecordsCsv(ss);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    EXPECT_EQ(back[k].y0, records[k].y0);
    EXPECT_EQ(back[k].y0StdError, records[k].y0StdError);
    EXPECT_EQ(back[k].z0, records[k].z0);
    EXPECT_EQ(back[k].mesh, records[k].mesh);
    EXPECT_EQ(back[k].sqErr, records[k].sqErr);
    EXPECT_EQ(back[k].estimator, "regression");
  }
}

TEST(Sweep, ImplicitReferenceAndFailures) {
  SweepSpec spec = smallSpec();
  spec.reference = ReferenceMode::kImplicit;
  const auto records = runSweep(spec);
  for (const auto& r : records) EXPECT_FALSE(r.failed()) << r.error;

  // K |pi| >= 1 for the implicit reference: recorded per cell, not thrown.
  spec.params = {{"r", 6.0}};
  const auto failed = runSweep(spec);
  EXPECT_TRUE(failed[0].failed());
  EXPECT_TRUE(std::isnan(failed[0].y0));
  EXPECT_FALSE(failed[2].failed());
  const auto manifest = nlohmann::json::parse(sweepManifest(spec, failed));
  EXPECT_EQ(manifest["failures"].size(), 2u);
  EXPECT_EQ(manifest["cells"], 4);
  EXPECT_EQ(manifest["tool"], "pathfbsde");
}

TEST(SweepSpec, ParsesJson) {
  const SweepSpec s = SweepSpec::fromJson(R"({"problem": "z-driver", "params": {"a": 0.2}, "n": [4, 8],
      "m": [2], "N": 500, "seed": 9, "reference": "implicit",
      "estimator": {"kind": "regression", "features": ["constant", "value"], "ridge": 1e-6}})");
  EXPECT_EQ(s.problem, "z-driver");
  EXPECT_EQ(s.params.at("a"), 0.2);
  EXPECT_EQ(s.steps, (std::vector<std::size_t>{4, 8}));
  EXPECT_EQ(s.samples, 500u);
  EXPECT_EQ(s.reference, ReferenceMode::kImplicit);
  EXPECT_EQ(s.estimator.features.features.size(), 2u);
  const SweepSpec again = SweepSpec::fromJson(s.toJson());
  EXPECT_EQ(again.toJson(), s.toJson());
}

TEST(SweepSpec, LoadsHistoryRelativeToSpec) {
  const SweepSpec s = SweepSpec::fromJson(
      R"({"problem": "bm-lookback", "n": [4], "m": [1], "N": 100, "history": "lookback_history.json"})",
      PATHFBSDE_TEST_DATA);
  ASSERT_TRUE(s.history.has_value());
  EXPECT_EQ(s.history->horizon(), 0.5);
}

TEST(SweepSpec, RejectsBadInput) {
  EXPECT_THROW(SweepSpec::fromJson("{"), std::invalid_argument);
  EXPECT_THROW(SweepSpec::fromJson(R"({"problem": "x", "n": [4], "m": [1], "N": 10, "bogus": 1})"),
               std::invalid_argument);
  EXPECT_THROW(SweepSpec::fromJson(R"({"problem": "x", "n": [8, 4], "m": [1], "N": 10})"), std::invalid_argument);
  EXPECT_THROW(SweepSpec::fromJson(R"({"problem": "x", "n": [4], "m": [1], "N": 10, "reference": "exact"})"),
               std::invalid_argument);
  EXPECT_THROW(SweepSpec::fromJson(R"({"problem": "x", "n": [4], "m": [1], "N": 10, "reference": "oracle-file"})"),
               std::invalid_argument);
  SweepSpec bad = smallSpec();
  bad.problem = "path-sigma-typo";
  EXPECT_THROW(runSweep(bad), std::invalid_argument);
}

TEST(Sweep, WallTimeScalesLinearlyInSamples) {
  const auto fastest = [](std::size_t samples) {
    SweepSpec spec = smallSpec();
    spec.steps = {16};
    spec.iterations = {2};
    spec.samples = samples;
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      runSweep(spec);
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
  };
  const double ratio = fastest(80000) / fastest(20000) / 4.0;
  EXPECT_GT(ratio, 0.7);
  EXPECT_LT(ratio, 1.3);
}
