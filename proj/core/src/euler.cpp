#include "pathfbsde/euler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pathfbsde/errors.hpp"
#include "pathfbsde/parallel.hpp"

namespace pathfbsde {

namespace {

void requireFinite(std::span<const double> v, const char* functional, std::size_t index) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw NumericalError(std::string(functional) + " returned a non-finite value at time index " +
                           std::to_string(index));
    }
  }
}

void checkDims(const CoefficientSet& cs, const DiscretePath& history) {
  cs.validate();
  if (history.dim() != cs.dims.state) {
    throw std::invalid_argument("history dimension " + std::to_string(history.dim()) +
                                " does not match state dimension " + std::to_string(cs.dims.state));
  }
}

}  // namespace

EulerStepper::EulerStepper(const CoefficientSet& cs, const TimeGrid& grid)
    : cs_(&cs),
      grid_(grid),
      drift_(cs.dims.state),
      diffusion_(cs.dims.state * cs.dims.noise),
      next_(cs.dims.state) {}

void EulerStepper::advance(PathBuilder& builder, std::span<const double> increments) {
  const std::size_t d = cs_->dims.state, l = cs_->dims.noise;
  while (!builder.complete()) {
    const std::size_t i = builder.filled() - 1;
    const double t = grid_[i];
    const double h = grid_.step(i);
    const StoppedView x = builder.view(i);
    cs_->drift(t, x, drift_);
    requireFinite(drift_, "drift", i);
    cs_->diffusion(t, x, diffusion_);
    requireFinite(diffusion_, "diffusion", i);
    const auto xi = builder.node(i);
    const double* dW = increments.data() + i * l;
    for (std::size_t r = 0; r < d; ++r) {
      double v = xi[r] + drift_[r] * h;
      for (std::size_t k = 0; k < l; ++k) v += diffusion_[r * l + k] * dW[k];
      next_[r] = v;
    }
    builder.append(next_);
  }
}

EulerTrajectory simulate(const CoefficientSet& cs, const DiscretePath& history, const TimeGrid& grid,
                         const SampleKey& key) {
  checkDims(cs, history);
  std::vector<double> increments(grid.steps() * cs.dims.noise);
  fillIncrements(key, grid, cs.dims.noise, increments);
  PathBuilder builder(history, grid);
  EulerStepper stepper(cs, grid);
  stepper.advance(builder, increments);
  return {builder.path(), grid, key, std::move(increments)};
}

double strongError(const CoefficientSet& cs, const DiscretePath& history, const TimeGrid& coarse,
                   const TimeGrid& fine, std::size_t samples, std::uint64_t seed) {
  checkDims(cs, history);
  if (samples < 100) throw std::invalid_argument("strongError: need at least 100 samples");
  const std::vector<std::size_t> map = fine.embed(coarse);
  const std::size_t l = cs.dims.noise, d = cs.dims.state;
  const SampleKey root(seed);
  const Blocks blocks{samples, 256};
  std::vector<std::vector<double>> partial(blocks.count(), std::vector<double>(coarse.size(), 0.0));

  parallelFor(blocks.count(), [&](std::size_t b) {
    PathBuilder fineBuilder(history, fine), coarseBuilder(history, coarse);
    EulerStepper fineStep(cs, fine), coarseStep(cs, coarse);
    std::vector<double> dWf(fine.steps() * l), dWc(coarse.steps() * l);
    auto& acc = partial[b];
    for (std::size_t p = blocks.begin(b); p < blocks.end(b); ++p) {
      fillIncrements(root.child(p), fine, l, dWf);
      std::fill(dWc.begin(), dWc.end(), 0.0);
      for (std::size_t i = 0; i + 1 < map.size(); ++i) {
        for (std::size_t j = map[i]; j < map[i + 1]; ++j) {
          for (std::size_t k = 0; k < l; ++k) dWc[i * l + k] += dWf[j * l + k];
        }
      }
      fineBuilder.restart();
      coarseBuilder.restart();
      fineStep.advance(fineBuilder, dWf);
      coarseStep.advance(coarseBuilder, dWc);
      for (std::size_t i = 0; i < coarse.size(); ++i) {
        auto xf = fineBuilder.node(map[i]);
        auto xc = coarseBuilder.node(i);
        double s = 0.0;
        for (std::size_t r = 0; r < d; ++r) s += (xf[r] - xc[r]) * (xf[r] - xc[r]);
        acc[i] += s;
      }
    }
  });

  std::vector<double> total(coarse.size(), 0.0);
  for (const auto& acc : partial) {
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += acc[i];
  }
  return *std::max_element(total.begin(), total.end()) / static_cast<double>(samples);
}

MeanEstimate supSquaredMoment(const CoefficientSet& cs, const DiscretePath& history, const TimeGrid& grid,
                              std::size_t samples, std::uint64_t seed) {
  checkDims(cs, history);
  if (samples < 2) throw std::invalid_argument("supSquaredMoment: need at least 2 samples");
  const SampleKey root(seed);
  const Blocks blocks{samples, 512};
  std::vector<std::pair<double, double>> partial(blocks.count());
  parallelFor(blocks.count(), [&](std::size_t b) {
    PathBuilder builder(history, grid);
    EulerStepper stepper(cs, grid);
    std::vector<double> dW(grid.steps() * cs.dims.noise);
    double s = 0.0, s2 = 0.0;
    for (std::size_t p = blocks.begin(b); p < blocks.end(b); ++p) {
      fillIncrements(root.child(p), grid, cs.dims.noise, dW);
      builder.restart();
      stepper.advance(builder, dW);
      const double sup = builder.path().supNorm();
      s += sup * sup;
      s2 += sup * sup * sup * sup;
    }
    partial[b] = {s, s2};
  });
  double s = 0.0, s2 = 0.0;
  for (const auto& [a, c] : partial) {
    s += a;
    s2 += c;
  }
  const double n = static_cast<double>(samples);
  const double mean = s / n;
  const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

std::vector<NodeSummary> summarize(const CoefficientSet& cs, const DiscretePath& history, const TimeGrid& grid,
                                   std::size_t samples, std::uint64_t seed) {
  checkDims(cs, history);
  if (samples < 2) throw std::invalid_argument("summarize: need at least 2 samples");
  const std::size_t d = cs.dims.state;
  const SampleKey root(seed);
  const Blocks blocks{samples, 512};
  const std::size_t width = grid.size() * d;
  std::vector<std::vector<double>> partial(blocks.count(), std::vector<double>(2 * width, 0.0));
  parallelFor(blocks.count(), [&](std::size_t b) {
    PathBuilder builder(history, grid);
    EulerStepper stepper(cs, grid);
    std::vector<double> dW(grid.steps() * cs.dims.noise);
    auto& acc = partial[b];
    for (std::size_t p = blocks.begin(b); p < blocks.end(b); ++p) {
      fillIncrements(root.child(p), grid, cs.dims.noise, dW);
      builder.restart();
      stepper.advance(builder, dW);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        auto x = builder.node(i);
        for (std::size_t r = 0; r < d; ++r) {
          acc[i * d + r] += x[r];
          acc[width + i * d + r] += x[r] * x[r];
        }
      }
    }
  });
  std::vector<double> total(2 * width, 0.0);
  for (const auto& acc : partial) {
    for (std::size_t j = 0; j < total.size(); ++j) total[j] += acc[j];
  }
  const double n = static_cast<double>(samples);
  std::vector<NodeSummary> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    NodeSummary s{grid[i], std::vector<double>(d), std::vector<double>(d)};
    for (std::size_t r = 0; r < d; ++r) {
      const double m = total[i * d + r] / n;
      s.mean[r] = m;
      s.variance[r] = std::max(0.0, (total[width + i * d + r] - n * m * m) / (n - 1.0));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pathfbsde
