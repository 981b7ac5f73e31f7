#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pathfbsde/discrete_path.hpp"

namespace pathfbsde {

enum class Feature {
  kConstant,
  kValue,         // X(t_i), d entries
  kRunningMax,    // max over [0, t_i] per coordinate, history included
  kRunningMin,
  kRunningMean,   // mean of node values X(t_0..t_i) per coordinate
  kIncrements,    // X(t_i) - X(t_{i-1}), ..., `lags` of them, zero-padded
};

struct FeatureConfig {
  std::vector<Feature> features{Feature::kConstant, Feature::kValue, Feature::kRunningMax,
                                Feature::kRunningMin, Feature::kRunningMean};
  std::size_t lags = 0;

  /// Names: constant, value, running-max, running-min, running-mean, increments:<k>.
  static FeatureConfig parse(std::span<const std::string> names);
  std::vector<std::string> names() const;
};

/// Regression basis evaluated on a path stopped at a node.
class FeatureMap {
 public:
  FeatureMap(FeatureConfig config, std::size_t dim);

  std::size_t size() const noexcept { return size_; }
  std::size_t dim() const noexcept { return dim_; }
  const FeatureConfig& config() const noexcept { return config_; }

  /// `x` must be stopped at a node time; writes size() values.
  void compute(const StoppedView& x, std::span<double> out) const;

 private:
  FeatureConfig config_;
  std::size_t dim_;
  std::size_t size_ = 0;
};

}  // namespace pathfbsde
