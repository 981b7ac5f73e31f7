#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pathfbsde/time_grid.hpp"

namespace pathfbsde {

/// Address of an independent random stream: a root seed plus a path of
/// indices, e.g. {outer} or {outer, time, inner}. Indices must stay below 2^63;
/// larger values are reserved for internal tags.
class SampleKey {
 public:
  explicit SampleKey(std::uint64_t rootSeed, std::vector<std::uint64_t> streamPath = {});

  std::uint64_t rootSeed() const noexcept { return root_; }
  const std::vector<std::uint64_t>& streamPath() const noexcept { return path_; }

  /// 64-bit stream identifier derived from (rootSeed, streamPath).
  std::uint64_t streamId() const noexcept { return id_; }

  SampleKey child(std::uint64_t index) const;

  bool operator==(const SampleKey& other) const noexcept {
    return root_ == other.root_ && path_ == other.path_;
  }

 private:
  std::uint64_t root_;
  std::vector<std::uint64_t> path_;
  std::uint64_t id_;
};

/// Key for the inner Brownian suffix number `innerIndex` spliced in at node `timeIndex`.
SampleKey suffixKey(const SampleKey& parent, std::size_t timeIndex, std::size_t innerIndex);

/// Brownian increments dW[i] ~ N(0, h_i I_l) over the steps of a grid.
struct BrownianIncrements {
  TimeGrid grid;
  std::size_t noiseDim;
  std::vector<double> dW;  // row-major, steps() rows of noiseDim entries

  std::size_t size() const noexcept { return grid.steps(); }
  std::span<const double> operator[](std::size_t i) const noexcept {
    return {dW.data() + i * noiseDim, noiseDim};
  }
};

/// Standard normals number first, first+1, ... of the stream `streamId`.
void fillStandardNormals(std::uint64_t streamId, std::uint64_t first, std::span<double> out) noexcept;

/// Writes grid.steps() * noiseDim increments into `out`.
void fillIncrements(const SampleKey& key, const TimeGrid& grid, std::size_t noiseDim,
                    std::span<double> out);

BrownianIncrements sampleIncrements(const SampleKey& key, const TimeGrid& grid, std::size_t noiseDim);

/// Increments of outer sample `sample` under `parent`. With `antithetic`,
/// samples 2k and 2k+1 share a stream and the odd one is negated.
void fillOuterIncrements(const SampleKey& parent, std::uint64_t sample, bool antithetic,
                         const TimeGrid& grid, std::size_t noiseDim, std::span<double> out);

}  // namespace pathfbsde
