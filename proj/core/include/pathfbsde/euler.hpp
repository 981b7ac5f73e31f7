#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pathfbsde/coefficients.hpp"
#include "pathfbsde/discrete_path.hpp"
#include "pathfbsde/sampling.hpp"
#include "pathfbsde/time_grid.hpp"

namespace pathfbsde {

/// One Euler path X^{gamma_t, pi}: the history followed by the node values.
struct EulerTrajectory {
  DiscretePath path;
  TimeGrid grid;
  SampleKey key;
  std::vector<double> increments;  // grid.steps() rows of l entries
};

/// Scratch buffers for the Euler recursion, reusable across samples.
class EulerStepper {
 public:
  EulerStepper(const CoefficientSet& cs, const TimeGrid& grid);

  /// Advances `builder` from its last filled node to the end of the grid:
  ///   X(t_{i+1}) = X(t_i) + b(t_i, X_{.^t_i}) h_i + sigma(t_i, X_{.^t_i}) dW_i.
  /// `increments` holds all grid.steps() rows; rows before the start are ignored.
  void advance(PathBuilder& builder, std::span<const double> increments);

 private:
  const CoefficientSet* cs_;
  TimeGrid grid_;
  std::vector<double> drift_;
  std::vector<double> diffusion_;
  std::vector<double> next_;
};

/// Throws pathfbsde::NumericalError if a coefficient returns a non-finite value.
EulerTrajectory simulate(const CoefficientSet& cs, const DiscretePath& history, const TimeGrid& grid,
                         const SampleKey& key);

/// max over coarse nodes of E|X_fine(t_i) - X_coarse(t_i)|^2, with the coarse
/// increments obtained by summing the fine ones (same Brownian path).
double strongError(const CoefficientSet& cs, const DiscretePath& history, const TimeGrid& coarse,
                   const TimeGrid& fine, std::size_t samples, std::uint64_t seed);

struct MeanEstimate {
  double mean = 0.0;
  double stdError = 0.0;
};

/// E[max_i |X(t_i)|^2], including the history's sup-norm.
MeanEstimate supSquaredMoment(const CoefficientSet& cs, const DiscretePath& history, const TimeGrid& grid,
                              std::size_t samples, std::uint64_t seed);

struct NodeSummary {
  double time;
  std::vector<double> mean;
  std::vector<double> variance;
};

/// Per-node sample mean and variance of X over `samples` paths.
std::vector<NodeSummary> summarize(const CoefficientSet& cs, const DiscretePath& history, const TimeGrid& grid,
                                   std::size_t samples, std::uint64_t seed);

}  // namespace pathfbsde
