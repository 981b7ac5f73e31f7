#include "pathfbsde/picard.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "pathfbsde/errors.hpp"
#include "pathfbsde/euler.hpp"
#include "pathfbsde/parallel.hpp"

namespace pathfbsde {

struct SchemeIterate::Shared {
  CoefficientSet cs;
  TimeGrid grid;
  std::size_t innerSamples;
  bool literalZTarget;
  FeatureMap features;
};

namespace {

constexpr std::size_t kOuterBlock = 4096;
constexpr std::uint64_t kSelfTag = (std::uint64_t{1} << 63) + 2;
constexpr double kFixedPointTolerance = 1e-12;
constexpr int kFixedPointIterations = 100;

// Sums of xi and of the weighted (dW_k / h) xi with their squares.
struct MomentSums {
  std::size_t count = 0;
  double s = 0.0, s2 = 0.0;
  std::vector<double> sz, sz2;

  explicit MomentSums(std::size_t noise) : sz(noise, 0.0), sz2(noise, 0.0) {}

  // `xi` feeds Y, `zBase` is weighted for Z.
  void add(double xi, double zBase, const double* dW, double h) {
    ++count;
    s += xi;
    s2 += xi * xi;
    for (std::size_t k = 0; k < sz.size(); ++k) {
      const double w = dW[k] / h * zBase;
      sz[k] += w;
      sz2[k] += w * w;
    }
  }
  void merge(const MomentSums& o) {
    count += o.count;
    s += o.s;
    s2 += o.s2;
    for (std::size_t k = 0; k < sz.size(); ++k) {
      sz[k] += o.sz[k];
      sz2[k] += o.sz2[k];
    }
  }
};

double meanOf(double s, std::size_t n) { return s / static_cast<double>(n); }

double stdErrorOf(double s, double s2, std::size_t n) {
  if (n < 2) return 0.0;
  const double nn = static_cast<double>(n);
  const double mean = s / nn;
  return std::sqrt(std::max(0.0, (s2 - nn * mean * mean) / (nn - 1.0)) / nn);
}

TracePoint toTrace(const MomentSums& m, std::size_t iteration) {
  TracePoint t;
  t.iteration = iteration;
  t.y0 = meanOf(m.s, m.count);
  t.y0StdError = stdErrorOf(m.s, m.s2, m.count);
  for (std::size_t k = 0; k < m.sz.size(); ++k) {
    t.z0.push_back(meanOf(m.sz[k], m.count));
    t.z0StdError.push_back(stdErrorOf(m.sz[k], m.sz2[k], m.count));
  }
  return t;
}

void requireFinite(double v, const char* what, std::size_t index) {
  if (!std::isfinite(v)) {
    throw NumericalError(std::string(what) + " is non-finite at time index " + std::to_string(index));
  }
}

void checkProblem(const CoefficientSet& cs, const DiscretePath& history, const SchemeConfig& config) {
  cs.validate();
  config.validate();
  if (history.dim() != cs.dims.state) {
    throw std::invalid_argument("history dimension " + std::to_string(history.dim()) +
                                " does not match state dimension " + std::to_string(cs.dims.state));
  }
  if (history.horizon() > config.grid.start() && !sameTime(history.horizon(), config.grid.start())) {
    throw std::invalid_argument("history extends past the grid start");
  }
}

struct PointValue {
  double y = 0.0;
  std::vector<double> z;
};

void accumulateNested(const SchemeIterate::Shared& sh, std::size_t level, std::size_t i,
                      const DiscretePath& prefix, const SampleKey& key, std::size_t first, std::size_t last,
                      MomentSums& sums);

// (Y^level, Z^level) at node i by nested simulation.
PointValue nestedPoint(const SchemeIterate::Shared& sh, std::size_t level, std::size_t i,
                       const DiscretePath& prefix, const SampleKey& key) {
  const std::size_t n = sh.grid.steps(), l = sh.cs.dims.noise;
  PointValue out{0.0, std::vector<double>(l, 0.0)};
  if (level == 0) return out;
  if (i == n) {
    out.y = sh.cs.terminal(prefix);
    return out;
  }
  MomentSums sums(l);
  accumulateNested(sh, level, i, prefix, key, 0, sh.innerSamples, sums);
  out.y = meanOf(sums.s, sums.count);
  for (std::size_t k = 0; k < l; ++k) out.z[k] = meanOf(sums.sz[k], sums.count);
  return out;
}

void accumulateNested(const SchemeIterate::Shared& sh, std::size_t level, std::size_t i,
                      const DiscretePath& prefix, const SampleKey& key, std::size_t first, std::size_t last,
                      MomentSums& sums) {
  const CoefficientSet& cs = sh.cs;
  const TimeGrid& grid = sh.grid;
  const std::size_t n = grid.steps(), l = cs.dims.noise;
  PathBuilder builder(prefix, i + 1, grid);
  EulerStepper stepper(cs, grid);
  std::vector<double> dW(n * l);
  // The lower iterate at node i depends on the prefix only.
  const PointValue here = nestedPoint(sh, level - 1, i, prefix, key.child(kSelfTag));

  for (std::size_t s = first; s < last; ++s) {
    const SampleKey sampleKey = suffixKey(key, i, s);
    fillIncrements(sampleKey, grid, l, dW);
    builder.restart();
    stepper.advance(builder, dW);
    const DiscretePath& path = builder.path();
    double xi = cs.terminal(path), current = 0.0;
    requireFinite(xi, "terminal", n);
    for (std::size_t j = i; j < n; ++j) {
      const PointValue prev = j == i ? here : nestedPoint(sh, level - 1, j, path, sampleKey);
      const double f = cs.driver(grid[j], path.atNode(j), prev.y, prev.z);
      requireFinite(f, "driver", j);
      xi += f * grid.step(j);
      if (j == i) current = f * grid.step(j);
    }
    sums.add(xi, sh.literalZTarget ? xi : xi - current, dW.data() + i * l, grid.step(i));
  }
}

std::vector<MomentSums> blockSums(std::size_t blocks, std::size_t l) {
  return std::vector<MomentSums>(blocks, MomentSums(l));
}

MomentSums reduce(const std::vector<MomentSums>& parts, std::size_t l) {
  MomentSums total(l);
  for (const auto& p : parts) total.merge(p);
  return total;
}

SchemeIterate::Shared makeShared(const CoefficientSet& cs, const SchemeConfig& config) {
  return {cs, config.grid, config.estimator.innerSamples, config.estimator.literalZTarget,
          FeatureMap(config.estimator.features, cs.dims.state)};
}

}  // namespace

const char* toString(EstimatorKind kind) noexcept {
  return kind == EstimatorKind::kNested ? "nested" : "regression";
}

EstimatorKind parseEstimator(const std::string& name) {
  if (name == "regression") return EstimatorKind::kRegression;
  if (name == "nested") return EstimatorKind::kNested;
  throw std::invalid_argument("unknown estimator '" + name + "' (expected regression or nested)");
}

void SchemeConfig::validate() const {
  if (grid.steps() < 1) throw std::invalid_argument("grid needs at least one step");
  if (samples < 2) throw std::invalid_argument("need at least 2 outer samples");
  if (!(estimator.ridge >= 0.0)) throw std::invalid_argument("ridge must be non-negative");
  if (estimator.kind == EstimatorKind::kRegression) {
    if (estimator.features.features.empty()) throw std::invalid_argument("regression needs at least one feature");
  } else {
    if (iterations > 3) throw std::invalid_argument("nested estimator supports at most 3 Picard iterations");
    if (grid.steps() > 16) throw std::invalid_argument("nested estimator supports at most 16 time steps");
    if (estimator.innerSamples < 2 || estimator.innerSamples > 256) {
      throw std::invalid_argument("nested estimator needs 2 to 256 inner samples");
    }
  }
}

SchemeIterate SchemeIterate::initial(const CoefficientSet& cs, const SchemeConfig& config) {
  SchemeIterate it;
  it.kind_ = config.estimator.kind;
  it.shared_ = std::make_shared<const Shared>(makeShared(cs, config));
  it.start_.z0.assign(cs.dims.noise, 0.0);
  it.start_.z0StdError.assign(cs.dims.noise, 0.0);
  return it;
}

const std::vector<RegressionRow>& SchemeIterate::surfaces() const noexcept { return rows_; }

const FeatureMap& SchemeIterate::features() const { return shared_->features; }

double SchemeIterate::y(std::size_t i, const DiscretePath& prefix, const SampleKey& key) const {
  const std::size_t n = shared_->grid.steps();
  if (i > n) throw std::out_of_range("node index past the grid");
  if (iteration_ == 0) return 0.0;
  if (i == 0) return start_.y0;
  if (i == n) return shared_->cs.terminal(prefix);
  if (kind_ == EstimatorKind::kNested) return nestedPoint(*shared_, iteration_, i, prefix, key).y;
  std::vector<double> phi(shared_->features.size());
  shared_->features.compute(prefix.atNode(i), phi);
  return rows_[i].predict(phi, 0);
}

std::vector<double> SchemeIterate::z(std::size_t i, const DiscretePath& prefix, const SampleKey& key) const {
  const std::size_t n = shared_->grid.steps(), l = shared_->cs.dims.noise;
  if (i > n) throw std::out_of_range("node index past the grid");
  if (iteration_ == 0 || i == n) return std::vector<double>(l, 0.0);
  if (i == 0) return start_.z0;
  if (kind_ == EstimatorKind::kNested) return nestedPoint(*shared_, iteration_, i, prefix, key).z;
  std::vector<double> phi(shared_->features.size()), out(l);
  shared_->features.compute(prefix.atNode(i), phi);
  for (std::size_t k = 0; k < l; ++k) out[k] = rows_[i].predict(phi, 1 + k);
  return out;
}

SchemeIterate picardStep(const SchemeIterate& prev, const CoefficientSet& cs, const DiscretePath& history,
                         const SchemeConfig& config) {
  checkProblem(cs, history, config);
  if (prev.kind_ != config.estimator.kind) throw std::invalid_argument("iterate and config estimators differ");
  const TimeGrid& grid = config.grid;
  const std::size_t n = grid.steps(), l = cs.dims.noise, N = config.samples;
  const std::size_t m = prev.iteration_ + 1;

  SchemeIterate next;
  next.iteration_ = m;
  next.kind_ = prev.kind_;
  next.shared_ = prev.shared_ ? prev.shared_ : std::make_shared<const SchemeIterate::Shared>(makeShared(cs, config));
  const auto& sh = *next.shared_;
  const SampleKey root(config.seed);
  const Blocks blocks{N, kOuterBlock};

  if (next.kind_ == EstimatorKind::kNested) {
    PathBuilder start(history, grid);
    const DiscretePath prefix = start.path();
    const SampleKey outer = config.freshPaths ? root.child(m) : root;
    auto parts = blockSums(blocks.count(), l);
    parallelFor(blocks.count(), [&](std::size_t b) {
      accumulateNested(sh, m, 0, prefix, outer, blocks.begin(b), blocks.end(b), parts[b]);
    });
    next.start_ = toTrace(reduce(parts, l), m);
    return next;
  }

  const FeatureMap& features = sh.features;
  const std::size_t p = features.size(), q = 1 + l;
  const SampleKey outer = config.freshPaths ? root.child(m) : root;
  const bool reuseGram = !config.freshPaths && prev.gramCache_ != nullptr;

  struct Partial {
    std::vector<RegressionAccumulator> acc;
    MomentSums start;
  };
  std::vector<Partial> parts;
  parts.reserve(blocks.count());
  for (std::size_t b = 0; b < blocks.count(); ++b) {
    parts.push_back({std::vector<RegressionAccumulator>(n, RegressionAccumulator(p, q)), MomentSums(l)});
  }

  parallelFor(blocks.count(), [&](std::size_t b) {
    Partial& part = parts[b];
    PathBuilder builder(history, grid);
    EulerStepper stepper(cs, grid);
    std::vector<double> dW(n * l), phi(n * p), fh(n), z(l, 0.0), targets(q);
    for (std::size_t path = blocks.begin(b); path < blocks.end(b); ++path) {
      fillOuterIncrements(outer, path, config.antithetic, grid, l, dW);
      builder.restart();
      stepper.advance(builder, dW);
      const DiscretePath& x = builder.path();

      for (std::size_t j = 0; j < n; ++j) {
        const StoppedView view = x.atNode(j);
        const std::span<double> phiJ(phi.data() + j * p, p);
        if (j > 0) features.compute(view, phiJ);
        double y = 0.0;
        std::fill(z.begin(), z.end(), 0.0);
        if (prev.iteration_ > 0) {
          if (j == 0) {
            y = prev.start_.y0;
            std::copy(prev.start_.z0.begin(), prev.start_.z0.end(), z.begin());
          } else {
            const RegressionRow& row = prev.rows_[j];
            y = row.predict(phiJ, 0);
            for (std::size_t k = 0; k < l; ++k) z[k] = row.predict(phiJ, 1 + k);
          }
        }
        const double f = cs.driver(grid[j], view, y, z);
        requireFinite(f, "driver", j);
        fh[j] = f * grid.step(j);
      }

      double xi = cs.terminal(x);
      requireFinite(xi, "terminal", n);
      for (std::size_t i = n; i-- > 0;) {
        const double later = xi;  // g + sum over j > i
        xi += fh[i];
        const double zBase = config.estimator.literalZTarget ? xi : later;
        const double h = grid.step(i);
        if (i == 0) {
          part.start.add(xi, zBase, dW.data(), h);
          break;
        }
        targets[0] = xi;
        for (std::size_t k = 0; k < l; ++k) targets[1 + k] = dW[i * l + k] / h * zBase;
        const std::span<const double> phiI(phi.data() + i * p, p);
        if (reuseGram) {
          part.acc[i].addTargets(phiI, targets);
        } else {
          part.acc[i].add(phiI, targets);
        }
      }
    }
  });

  std::vector<RegressionAccumulator> total(n, RegressionAccumulator(p, q));
  MomentSums start(l);
  for (const auto& part : parts) {
    for (std::size_t i = 1; i < n; ++i) total[i].merge(part.acc[i]);
    start.merge(part.start);
  }
  parts.clear();
  if (reuseGram) {
    for (std::size_t i = 1; i < n; ++i) total[i].setGram((*prev.gramCache_)[i]);
    next.gramCache_ = prev.gramCache_;
  }

  next.start_ = toTrace(start, m);
  std::vector<double> startValues{next.start_.y0};
  startValues.insert(startValues.end(), next.start_.z0.begin(), next.start_.z0.end());
  next.rows_.resize(n);
  next.rows_[0] = RegressionRow::constant(p, startValues);
  for (std::size_t i = 1; i < n; ++i) next.rows_[i] = solveRegression(total[i], config.estimator.ridge);
  if (!config.freshPaths && !reuseGram) {
    next.gramCache_ = std::make_shared<const std::vector<RegressionAccumulator>>(std::move(total));
  }
  return next;
}

namespace {

double elapsedMs(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

void finish(SolveResult& r, const TracePoint& last) {
  r.y0 = last.y0;
  r.y0StdError = last.y0StdError;
  r.z0 = last.z0;
  r.z0StdError = last.z0StdError;
}

// Solves y = base + h f(t, x, y, z) by fixed-point iteration.
double implicitValue(const CoefficientSet& cs, double t, const StoppedView& x, double base,
                     std::span<const double> z, double h, std::size_t node) {
  double y = base, residual = 0.0;
  for (int it = 0; it < kFixedPointIterations; ++it) {
    const double f = cs.driver(t, x, y, z);
    requireFinite(f, "driver", node);
    const double next = base + h * f;
    residual = std::abs(next - y);
    if (residual <= kFixedPointTolerance * std::max(1.0, std::abs(next))) return next;
    y = next;
  }
  throw NumericalError("implicit fixed point did not converge at time index " + std::to_string(node) +
                       " (residual " + std::to_string(residual) + ")");
}

}  // namespace

SolveResult solvePicard(const CoefficientSet& cs, const DiscretePath& history, const SchemeConfig& config) {
  checkProblem(cs, history, config);
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult result;
  result.method = "picard";
  result.config = config;
  SchemeIterate it = SchemeIterate::initial(cs, config);
  result.trace.push_back(it.start());
  for (std::size_t m = 0; m < config.iterations; ++m) {
    it = picardStep(it, cs, history, config);
    result.trace.push_back(it.start());
    result.trace.back().wallMs = elapsedMs(t0);
  }
  finish(result, result.trace.back());
  result.wallMs = elapsedMs(t0);
  return result;
}

SolveResult solveImplicit(const CoefficientSet& cs, const DiscretePath& history, const SchemeConfig& config) {
  checkProblem(cs, history, config);
  if (config.estimator.kind != EstimatorKind::kRegression) {
    throw std::invalid_argument("the implicit scheme requires the regression estimator");
  }
  const TimeGrid& grid = config.grid;
  const double contraction = cs.lipschitz.driver * grid.mesh();
  if (!(contraction < 1.0)) {
    throw std::invalid_argument("implicit scheme needs K |pi| < 1, got " + std::to_string(contraction));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = grid.steps(), l = cs.dims.noise, N = config.samples;
  const FeatureMap features(config.estimator.features, cs.dims.state);
  const std::size_t p = features.size(), q = 1 + l;
  const bool multiStep = config.estimator.implicitTarget == ImplicitTarget::kMultiStep;
  const SampleKey root(config.seed);
  const Blocks blocks{N, kOuterBlock};

  std::vector<std::optional<DiscretePath>> paths(N);
  std::vector<double> dW(N * n * l);
  std::vector<double> carried(N);  // regression target for the next node back
  parallelFor(blocks.count(), [&](std::size_t b) {
    PathBuilder builder(history, grid);
    EulerStepper stepper(cs, grid);
    for (std::size_t path = blocks.begin(b); path < blocks.end(b); ++path) {
      const std::span<double> inc(dW.data() + path * n * l, n * l);
      fillOuterIncrements(root, path, config.antithetic, grid, l, inc);
      builder.restart();
      stepper.advance(builder, inc);
      paths[path] = builder.path();
      carried[path] = cs.terminal(*paths[path]);
      requireFinite(carried[path], "terminal", n);
    }
  });

  for (std::size_t i = n - 1; i >= 1; --i) {
    const double h = grid.step(i);
    std::vector<RegressionAccumulator> parts(blocks.count(), RegressionAccumulator(p, q));
    parallelFor(blocks.count(), [&](std::size_t b) {
      std::vector<double> phi(p), targets(q);
      for (std::size_t path = blocks.begin(b); path < blocks.end(b); ++path) {
        features.compute(paths[path]->atNode(i), phi);
        targets[0] = carried[path];
        for (std::size_t k = 0; k < l; ++k) targets[1 + k] = dW[(path * n + i) * l + k] / h * carried[path];
        parts[b].add(phi, targets);
      }
    });
    RegressionAccumulator total(p, q);
    for (const auto& part : parts) total.merge(part);
    const RegressionRow row = solveRegression(total, config.estimator.ridge);

    parallelFor(blocks.count(), [&](std::size_t b) {
      std::vector<double> phi(p), z(l);
      for (std::size_t path = blocks.begin(b); path < blocks.end(b); ++path) {
        const StoppedView view = paths[path]->atNode(i);
        features.compute(view, phi);
        for (std::size_t k = 0; k < l; ++k) z[k] = row.predict(phi, 1 + k);
        const double y = implicitValue(cs, grid[i], view, row.predict(phi, 0), z, h, i);
        if (multiStep) {
          carried[path] += cs.driver(grid[i], view, y, z) * h;
        } else {
          carried[path] = y;
        }
      }
    });
  }

  std::vector<MomentSums> sums = blockSums(blocks.count(), l);
  parallelFor(blocks.count(), [&](std::size_t b) {
    for (std::size_t path = blocks.begin(b); path < blocks.end(b); ++path) {
      sums[b].add(carried[path], carried[path], dW.data() + path * n * l, grid.step(0));
    }
  });
  TracePoint point = toTrace(reduce(sums, l), 0);
  point.y0 = implicitValue(cs, grid[0], paths.front()->atNode(0), point.y0, point.z0, grid.step(0), 0);

  SolveResult result;
  result.method = "implicit";
  result.config = config;
  result.wallMs = elapsedMs(t0);
  point.wallMs = result.wallMs;
  result.trace.push_back(point);
  finish(result, point);
  return result;
}

PpdeValue evaluatePPDE(const CoefficientSet& cs, const DiscretePath& history, const SchemeConfig& config) {
  PpdeValue out;
  out.t = config.grid.start();
  out.solve = solvePicard(cs, history, config);
  out.value = out.solve.y0;
  out.stdError = out.solve.y0StdError;
  return out;
}

}  // namespace pathfbsde
