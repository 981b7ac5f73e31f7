#include "pathfbsde/condexp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pathfbsde/errors.hpp"
#include "pathfbsde/euler.hpp"
#include "pathfbsde/parallel.hpp"

namespace pathfbsde {

namespace {

std::string describe(const SampleKey& key) {
  std::string s = "seed " + std::to_string(key.rootSeed()) + ", stream [";
  for (std::size_t j = 0; j < key.streamPath().size(); ++j) {
    s += (j ? "," : "") + std::to_string(key.streamPath()[j]);
  }
  return s + "]";
}

// Sums of xi, xi^2, and per coordinate w_k xi, (w_k xi)^2 over the inner samples.
struct InnerSums {
  double s = 0.0, s2 = 0.0;
  std::vector<double> ws, ws2;
};

InnerSums innerLoop(const PathFunctional& xi, const CoefficientSet& cs, const DiscretePath& prefix, std::size_t i,
                    const TimeGrid& grid, std::size_t innerSamples, const SampleKey& key, bool weighted) {
  cs.validate();
  if (innerSamples < 2) throw std::invalid_argument("nested estimator: need at least 2 inner samples");
  if (i > grid.steps()) throw std::invalid_argument("nested estimator: time index past the horizon");
  if (weighted && i == grid.steps()) {
    throw std::invalid_argument("weighted nested estimator: no step after the last node");
  }
  if (prefix.dim() != cs.dims.state) throw std::invalid_argument("nested estimator: prefix dimension mismatch");
  const std::size_t l = cs.dims.noise;
  const double h = weighted ? grid.step(i) : 1.0;
  // Validates that the prefix sits on the grid up to node i.
  const PathBuilder proto(prefix, i + 1, grid);

  const Blocks blocks{innerSamples, 64};
  std::vector<InnerSums> partial(blocks.count());
  parallelFor(blocks.count(), [&](std::size_t b) {
    PathBuilder builder = proto;
    EulerStepper stepper(cs, grid);
    std::vector<double> dW(grid.steps() * l);
    InnerSums acc;
    acc.ws.assign(l, 0.0);
    acc.ws2.assign(l, 0.0);
    for (std::size_t j = blocks.begin(b); j < blocks.end(b); ++j) {
      const SampleKey inner = suffixKey(key, i, j);
      fillIncrements(inner, grid, l, dW);
      builder.restart();
      stepper.advance(builder, dW);
      const double v = xi(builder.path());
      if (!std::isfinite(v)) {
        throw NumericalError("path functional returned a non-finite value (" + describe(inner) + ")");
      }
      acc.s += v;
      acc.s2 += v * v;
      if (weighted) {
        for (std::size_t k = 0; k < l; ++k) {
          const double w = dW[i * l + k] / h * v;
          acc.ws[k] += w;
          acc.ws2[k] += w * w;
        }
      }
    }
    partial[b] = std::move(acc);
  });

  InnerSums total;
  total.ws.assign(l, 0.0);
  total.ws2.assign(l, 0.0);
  for (const auto& p : partial) {
    total.s += p.s;
    total.s2 += p.s2;
    for (std::size_t k = 0; k < l; ++k) {
      total.ws[k] += p.ws[k];
      total.ws2[k] += p.ws2[k];
    }
  }
  return total;
}

Estimate meanAndError(double s, double s2, std::size_t count) {
  const double n = static_cast<double>(count);
  const double mean = s / n;
  const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

}  // namespace

Estimate nestedEstimate(const PathFunctional& xi, const CoefficientSet& cs, const DiscretePath& prefix,
                        std::size_t i, const TimeGrid& grid, std::size_t innerSamples, const SampleKey& key) {
  const InnerSums sums = innerLoop(xi, cs, prefix, i, grid, innerSamples, key, false);
  return meanAndError(sums.s, sums.s2, innerSamples);
}

VectorEstimate weightedNestedEstimate(const PathFunctional& xi, const CoefficientSet& cs,
                                      const DiscretePath& prefix, std::size_t i, const TimeGrid& grid,
                                      std::size_t innerSamples, const SampleKey& key) {
  const InnerSums sums = innerLoop(xi, cs, prefix, i, grid, innerSamples, key, true);
  VectorEstimate out;
  for (std::size_t k = 0; k < sums.ws.size(); ++k) {
    const Estimate e = meanAndError(sums.ws[k], sums.ws2[k], innerSamples);
    out.mean.push_back(e.mean);
    out.stdError.push_back(e.stdError);
  }
  return out;
}

}  // namespace pathfbsde
