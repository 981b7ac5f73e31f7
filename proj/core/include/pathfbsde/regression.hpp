#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pathfbsde/discrete_path.hpp"
#include "pathfbsde/features.hpp"

namespace pathfbsde {

/// Running normal equations sum(phi phi^T), sum(phi y_q), sum(y_q^2) for q
/// targets sharing one feature vector.
class RegressionAccumulator {
 public:
  RegressionAccumulator(std::size_t features, std::size_t targets);

  void add(std::span<const double> phi, std::span<const double> y) noexcept;
  /// Adds `phi` to the Gram matrix only (targets are added separately with addTargets).
  void addGram(std::span<const double> phi) noexcept;
  void addTargets(std::span<const double> phi, std::span<const double> y) noexcept;
  void merge(const RegressionAccumulator& other);

  std::size_t features() const noexcept { return p_; }
  std::size_t targets() const noexcept { return q_; }
  std::size_t samples() const noexcept { return n_; }

  /// Full symmetric Gram matrix, row-major p x p.
  std::vector<double> gram() const;
  double rhs(std::size_t target, std::size_t feature) const noexcept { return rhs_[target * p_ + feature]; }
  double sumSquares(std::size_t target) const noexcept { return sumSq_[target]; }

  /// Replaces the Gram part with a cached one (same samples, same features).
  void setGram(const RegressionAccumulator& other);

 private:
  std::size_t p_, q_;
  std::size_t n_ = 0;
  std::vector<double> gram_;  // upper triangle used
  std::vector<double> rhs_;
  std::vector<double> sumSq_;
};

/// Ridge least-squares fit for one time index: beta_q = (G + lambda I)^-1 sum(phi y_q).
struct RegressionRow {
  std::size_t features = 0;
  std::size_t targets = 0;
  std::vector<double> beta;        // targets rows of `features` coefficients
  double lambda = 0.0;             // ridge actually used
  std::vector<double> covariance;  // (G + lambda I)^-1, row-major
  std::vector<double> residualVariance;
  std::size_t samples = 0;

  double predict(std::span<const double> phi, std::size_t target = 0) const noexcept {
    const double* b = beta.data() + target * features;
    double s = 0.0;
    for (std::size_t j = 0; j < features; ++j) s += b[j] * phi[j];
    return s;
  }
  double predictionStdError(std::span<const double> phi, std::size_t target = 0) const noexcept;

  /// Row that predicts `values[q]` for every input (used where the
  /// conditioning sigma-field is trivial).
  static RegressionRow constant(std::size_t features, std::vector<double> values);
};

/// Solves the normal equations by Cholesky. If the Gram matrix is singular at
/// lambda = 0 the fit is retried with lambda = 1e-8 trace(G) / p.
/// Throws std::invalid_argument if samples < features, NumericalError if the
/// factorization still fails.
RegressionRow solveRegression(const RegressionAccumulator& acc, double lambda = 0.0);

struct RegressionSample {
  StoppedView prefix;  // stopped at the regression time node
  double target;
};

RegressionRow fitRegression(std::span<const RegressionSample> samples, const FeatureMap& features,
                            double lambda = 0.0);

}  // namespace pathfbsde
