#include "pathfbsde/features.hpp"

#include <stdexcept>

namespace pathfbsde {

FeatureConfig FeatureConfig::parse(std::span<const std::string> names) {
  FeatureConfig out;
  out.features.clear();
  for (const auto& name : names) {
    if (name == "constant") {
      out.features.push_back(Feature::kConstant);
    } else if (name == "value") {
      out.features.push_back(Feature::kValue);
    } else if (name == "running-max") {
      out.features.push_back(Feature::kRunningMax);
    } else if (name == "running-min") {
      out.features.push_back(Feature::kRunningMin);
    } else if (name == "running-mean") {
      out.features.push_back(Feature::kRunningMean);
    } else if (name.rfind("increments:", 0) == 0) {
      const std::string count = name.substr(11);
      std::size_t used = 0;
      unsigned long k = 0;
      try {
        k = std::stoul(count, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != count.size() || count.empty() || k == 0) {
        throw std::invalid_argument("feature '" + name + "': expected increments:<k> with k >= 1");
      }
      out.features.push_back(Feature::kIncrements);
      out.lags = k;
    } else {
      throw std::invalid_argument("unknown feature '" + name +
                                  "' (known: constant, value, running-max, running-min, running-mean, "
                                  "increments:<k>)");
    }
  }
  if (out.features.empty()) throw std::invalid_argument("feature list must not be empty");
  return out;
}

std::vector<std::string> FeatureConfig::names() const {
  std::vector<std::string> out;
  for (Feature f : features) {
    switch (f) {
      case Feature::kConstant: out.emplace_back("constant"); break;
      case Feature::kValue: out.emplace_back("value"); break;
      case Feature::kRunningMax: out.emplace_back("running-max"); break;
      case Feature::kRunningMin: out.emplace_back("running-min"); break;
      case Feature::kRunningMean: out.emplace_back("running-mean"); break;
      case Feature::kIncrements: out.push_back("increments:" + std::to_string(lags)); break;
    }
  }
  return out;
}

FeatureMap::FeatureMap(FeatureConfig config, std::size_t dim) : config_(std::move(config)), dim_(dim) {
  if (dim == 0) throw std::invalid_argument("FeatureMap: dimension must be >= 1");
  for (Feature f : config_.features) {
    if (f == Feature::kConstant) {
      size_ += 1;
    } else if (f == Feature::kIncrements) {
      if (config_.lags == 0) throw std::invalid_argument("FeatureMap: increments feature needs lags >= 1");
      size_ += config_.lags * dim;
    } else {
      size_ += dim;
    }
  }
}

void FeatureMap::compute(const StoppedView& x, std::span<double> out) const {
  if (!x.hasNode()) throw std::invalid_argument("FeatureMap: view must be stopped at or after the first node");
  const DiscretePath& p = x.base();
  const std::size_t i = x.node();
  std::size_t at = 0;
  for (Feature f : config_.features) {
    switch (f) {
      case Feature::kConstant:
        out[at++] = 1.0;
        break;
      case Feature::kValue: {
        auto v = p.nodeValue(i);
        for (std::size_t c = 0; c < dim_; ++c) out[at++] = v[c];
        break;
      }
      case Feature::kRunningMax:
        for (std::size_t c = 0; c < dim_; ++c) out[at++] = p.runningMax(i, c);
        break;
      case Feature::kRunningMin:
        for (std::size_t c = 0; c < dim_; ++c) out[at++] = p.runningMin(i, c);
        break;
      case Feature::kRunningMean:
        for (std::size_t c = 0; c < dim_; ++c) out[at++] = p.runningMean(i, c);
        break;
      case Feature::kIncrements:
        for (std::size_t lag = 0; lag < config_.lags; ++lag) {
          for (std::size_t c = 0; c < dim_; ++c) {
            out[at++] = i >= lag + 1 ? p.nodeValue(i - lag)[c] - p.nodeValue(i - lag - 1)[c] : 0.0;
          }
        }
        break;
    }
  }
}

}  // namespace pathfbsde
