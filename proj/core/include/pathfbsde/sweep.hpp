#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pathfbsde/coefficients.hpp"
#include "pathfbsde/discrete_path.hpp"
#include "pathfbsde/picard.hpp"

namespace pathfbsde {

enum class ReferenceMode {
  kClosedForm,  // the zoo problem's reference value at (t0, history)
  kImplicit,    // solveImplicit at the same n, N and seed
  kOracleFile,  // {"y0": value} read from a JSON file
};

const char* toString(ReferenceMode mode) noexcept;
ReferenceMode parseReferenceMode(const std::string& name);

/// A grid of solver runs over step counts n and Picard iteration counts m.
///
/// JSON form:
///   {"problem": "discounted-terminal", "params": {"r": 0.5}, "n": [8, 16],
///    "m": [8], "N": 100000, "seed": 1, "reference": "closed-form",
///    "estimator": {"kind": "regression", "features": ["constant", "value"],
///                  "ridge": 0, "ninner": 64},
///    "oracle_file": "...", "history": "path.json", "implicit": false,
///    "fresh_paths": false, "antithetic": false}
/// Only "problem", "n", "m" and "N" are required.
struct SweepSpec {
  std::string problem;
  ProblemParams params;
  std::vector<std::size_t> steps;       // n values, distinct and sorted
  std::vector<std::size_t> iterations;  // m values
  std::size_t samples = 10000;
  EstimatorConfig estimator;
  std::uint64_t seed = 0;
  ReferenceMode reference = ReferenceMode::kClosedForm;
  std::string oracleFile;
  std::optional<DiscretePath> history;  // defaults to the zero path at t = 0
  /// Run solveImplicit in every cell instead of solvePicard; every m of a column shares that run.
  bool implicit = false;
  bool freshPaths = false;
  bool antithetic = false;

  void validate() const;
  static SweepSpec fromJson(const std::string& text, const std::string& baseDir = ".");
  std::string toJson() const;
};

struct ConvergenceRecord {
  std::string problem;
  std::size_t n = 0;
  double mesh = 0.0;
  std::size_t m = 0;
  std::size_t samples = 0;
  std::string estimator;
  std::uint64_t seed = 0;
  double y0 = 0.0;
  double y0StdError = 0.0;
  std::vector<double> z0;
  double reference = 0.0;
  double sqErr = 0.0;
  double wallMs = 0.0;
  /// Empty on success; the solver's message for a failed cell (numeric fields are NaN).
  std::string error;

  bool failed() const noexcept { return !error.empty(); }
};

/// Solver configuration of one (n, m) cell.
SchemeConfig cellConfig(const SweepSpec& spec, std::size_t n, std::size_t m);

/// Runs one cell on its own.
ConvergenceRecord runCell(const SweepSpec& spec, std::size_t n, std::size_t m);

/// One record per (n, m) in spec order, n-major. Solver failures are recorded
/// per cell and the sweep continues. Picard cells sharing n are computed from
/// one run at the largest m; its trace entry m equals a separate run with m
/// iterations bit for bit.
std::vector<ConvergenceRecord> runSweep(const SweepSpec& spec);

void writeRecordsCsv(std::ostream& out, const std::vector<ConvergenceRecord>& records);
std::vector<ConvergenceRecord> readRecordsCsv(std::istream& in);

/// manifest.json contents for a finished sweep.
std::string sweepManifest(const SweepSpec& spec, const std::vector<ConvergenceRecord>& records);

/// Git revision the library was built from.
const char* buildRevision() noexcept;

enum class RateAxis { kMesh, kPicard };

RateAxis parseRateAxis(const std::string& name);

struct RatePoint {
  double x = 0.0;  // log |pi| or m
  double y = 0.0;  // log squared error
};

struct RateFit {
  RateAxis axis = RateAxis::kMesh;
  std::vector<RatePoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slopeCi = 0.0;  // 95% half-width
  /// exp(slope): per-iteration factor of the squared error (picard axis).
  double ratio() const noexcept;
  std::string toJson() const;
};

struct FitOptions {
  /// Picard axis: squared errors at or below this are treated as the noise
  /// floor. Negative selects 1e-20 * max(1, ref^2).
  double noiseFloor = -1.0;
};

/// OLS fit of log squared error against log |pi| (cells at the largest m) or
/// against m (cells at the largest n, leading strictly decreasing run above
/// the noise floor). Throws std::invalid_argument with fewer than 3 usable points.
RateFit fitRate(const std::vector<ConvergenceRecord>& records, RateAxis axis, const FitOptions& options = {});

/// Plain OLS on given points (sorted internally, so row order does not matter).
RateFit fitPoints(std::vector<RatePoint> points, RateAxis axis);

}  // namespace pathfbsde
