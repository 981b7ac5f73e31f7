#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "pathfbsde/coefficients.hpp"
#include "pathfbsde/discrete_path.hpp"
#include "pathfbsde/features.hpp"
#include "pathfbsde/regression.hpp"
#include "pathfbsde/sampling.hpp"
#include "pathfbsde/time_grid.hpp"

namespace pathfbsde {

/// A pure functional of a completed path (history plus all grid nodes).
using PathFunctional = std::function<double(const DiscretePath&)>;

struct Estimate {
  double mean = 0.0;
  double stdError = 0.0;
};

struct VectorEstimate {
  std::vector<double> mean;
  std::vector<double> stdError;
};

/// E[xi(X(omega (+)_{t_i} W)) | prefix] by nested Monte Carlo.
///
/// `prefix` must sit on `grid` up to node i. Each of the `innerSamples`
/// continuations is driven by the stream suffixKey(key, i, j) and continues
/// the Euler recursion from node i.
Estimate nestedEstimate(const PathFunctional& xi, const CoefficientSet& cs, const DiscretePath& prefix,
                        std::size_t i, const TimeGrid& grid, std::size_t innerSamples, const SampleKey& key);

/// E[(W^k(t_{i+1}) - W^k(t_i)) / h_i * xi(...) | prefix], k = 1..l: the
/// weak approximation of the vertical derivative at t_i. Requires i < n.
VectorEstimate weightedNestedEstimate(const PathFunctional& xi, const CoefficientSet& cs,
                                      const DiscretePath& prefix, std::size_t i, const TimeGrid& grid,
                                      std::size_t innerSamples, const SampleKey& key);

}  // namespace pathfbsde
