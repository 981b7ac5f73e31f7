#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pathfbsde/coefficients.hpp"
#include "pathfbsde/discrete_path.hpp"
#include "pathfbsde/features.hpp"
#include "pathfbsde/regression.hpp"
#include "pathfbsde/sampling.hpp"
#include "pathfbsde/time_grid.hpp"

namespace pathfbsde {

enum class EstimatorKind { kRegression, kNested };

/// How the implicit scheme realizes E[Y(t_{i+1}) | F_{t_i}] in regression mode.
/// kMultiStep regresses g + sum_{j>i} f_j h_j (equal by the tower property),
/// kOneStep regresses the per-path value Y(t_{i+1}).
enum class ImplicitTarget { kMultiStep, kOneStep };

const char* toString(EstimatorKind kind) noexcept;
EstimatorKind parseEstimator(const std::string& name);

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::kRegression;
  std::size_t innerSamples = 64;
  FeatureConfig features;
  double ridge = 0.0;
  ImplicitTarget implicitTarget = ImplicitTarget::kMultiStep;
  /// Keep the f(t_i) h_i term inside the Z target. It is F_{t_i}-measurable and
  /// multiplies a weight with zero conditional mean, so dropping it (the
  /// default) changes only the estimator noise.
  bool literalZTarget = false;
};

struct SchemeConfig {
  TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 16);
  std::size_t iterations = 4;  // m
  std::size_t samples = 10000;  // N, outer paths
  EstimatorConfig estimator;
  std::uint64_t seed = 0;
  /// Draw a new outer path set for every Picard iteration instead of reusing one.
  bool freshPaths = false;
  bool antithetic = false;

  /// Throws std::invalid_argument for inconsistent settings, including the
  /// nested-mode limits (m <= 3, n <= 16, inner samples <= 256).
  void validate() const;
};

/// (Y^m, Z^m) at the initial time, with Monte Carlo standard errors.
struct TracePoint {
  std::size_t iteration = 0;
  double y0 = 0.0;
  double y0StdError = 0.0;
  std::vector<double> z0;
  std::vector<double> z0StdError;
  double wallMs = 0.0;  // elapsed since the solve started
};

/// The m-th Picard iterate (Y^m, Z^m) on the grid nodes.
///
/// Regression mode keeps one surface per node (Y and Z_k share the basis);
/// nested mode keeps the recursion depth and evaluates by nested simulation.
/// Values between nodes use the node to the left (piecewise-constant
/// extension); Z at the last node is 0.
class SchemeIterate {
 public:
  /// The iterate (Y^0, Z^0) = (0, 0).
  static SchemeIterate initial(const CoefficientSet& cs, const SchemeConfig& config);

  std::size_t iteration() const noexcept { return iteration_; }
  EstimatorKind kind() const noexcept { return kind_; }
  const TracePoint& start() const noexcept { return start_; }

  /// Y^m(t_i, prefix) and Z^m(t_i, prefix). `prefix` must sit on the grid up
  /// to node i. `key` drives nested mode and is ignored in regression mode.
  double y(std::size_t i, const DiscretePath& prefix, const SampleKey& key) const;
  std::vector<double> z(std::size_t i, const DiscretePath& prefix, const SampleKey& key) const;

  /// Regression rows per node (regression mode only; row 0 is the constant
  /// initial-time estimate).
  const std::vector<RegressionRow>& surfaces() const noexcept;
  const FeatureMap& features() const;

  struct Shared;

 private:
  friend SchemeIterate picardStep(const SchemeIterate&, const CoefficientSet&, const DiscretePath&,
                                  const SchemeConfig&);
  SchemeIterate() = default;

  std::size_t iteration_ = 0;
  EstimatorKind kind_ = EstimatorKind::kRegression;
  TracePoint start_;
  std::vector<RegressionRow> rows_;
  std::shared_ptr<const Shared> shared_;
  // Gram matrices of the reused outer path set (regression mode).
  std::shared_ptr<const std::vector<RegressionAccumulator>> gramCache_;
};

/// One application of the Picard map: iterate m -> m + 1.
SchemeIterate picardStep(const SchemeIterate& prev, const CoefficientSet& cs, const DiscretePath& history,
                         const SchemeConfig& config);

struct SolveResult {
  std::string method;  // "picard" or "implicit"
  double y0 = 0.0;
  double y0StdError = 0.0;
  std::vector<double> z0;
  std::vector<double> z0StdError;
  /// Picard: one point per iterate m = 0..M. Implicit: the single final point.
  std::vector<TracePoint> trace;
  double wallMs = 0.0;
  SchemeConfig config;
};

/// Applies picardStep `config.iterations` times from (0, 0) and reports the
/// iterates at (t_0, history).
SolveResult solvePicard(const CoefficientSet& cs, const DiscretePath& history, const SchemeConfig& config);

/// Backward implicit scheme (Y^inf, Z^inf). Requires K |pi| < 1 for the
/// driver's declared y-Lipschitz constant K and estimator = regression.
/// Throws NumericalError if the per-node fixed point does not converge
/// within 100 iterations to 1e-12.
SolveResult solveImplicit(const CoefficientSet& cs, const DiscretePath& history, const SchemeConfig& config);

struct PpdeValue {
  double t = 0.0;
  double value = 0.0;
  double stdError = 0.0;
  SolveResult solve;
};

/// u(t, gamma) for the path-dependent PDE associated with (b, sigma, f, g),
/// computed as Y^{gamma_t}(t) with t = config.grid.start().
PpdeValue evaluatePPDE(const CoefficientSet& cs, const DiscretePath& history, const SchemeConfig& config);

}  // namespace pathfbsde
