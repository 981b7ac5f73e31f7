#include "pathfbsde/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pathfbsde/philox.hpp"

namespace pathfbsde {

namespace {

constexpr std::uint64_t kSuffixTag = (std::uint64_t{1} << 63) + 1;

std::uint64_t mix(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t extend(std::uint64_t id, std::uint64_t index) noexcept {
  return mix(id ^ mix(index + 0x632BE59BD9B4E019ull));
}

double toUnit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

SampleKey::SampleKey(std::uint64_t rootSeed, std::vector<std::uint64_t> streamPath)
    : root_(rootSeed), path_(std::move(streamPath)), id_(mix(rootSeed)) {
  for (auto index : path_) id_ = extend(id_, index);
}

SampleKey SampleKey::child(std::uint64_t index) const {
  SampleKey out = *this;
  out.path_.push_back(index);
  out.id_ = extend(id_, index);
  return out;
}

SampleKey suffixKey(const SampleKey& parent, std::size_t timeIndex, std::size_t innerIndex) {
  return parent.child(kSuffixTag).child(timeIndex).child(innerIndex);
}

void fillStandardNormals(std::uint64_t streamId, std::uint64_t first, std::span<double> out) noexcept {
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(streamId),
                                         static_cast<std::uint32_t>(streamId >> 32)};
  std::uint64_t index = first;
  std::size_t written = 0;
  while (written < out.size()) {
    const std::uint64_t block = index >> 1;
    const auto r = philox4x32({static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), 0u, 0u},
                              key);
    // Box-Muller: one block yields the pair (r cos, r sin).
    const double radius = std::sqrt(-2.0 * std::log(toUnit(r[0], r[1])));
    const double angle = 2.0 * std::numbers::pi * toUnit(r[2], r[3]);
    if ((index & 1u) == 0) {
      out[written++] = radius * std::cos(angle);
      ++index;
      if (written == out.size()) break;
    }
    out[written++] = radius * std::sin(angle);
    ++index;
  }
}

void fillIncrements(const SampleKey& key, const TimeGrid& grid, std::size_t noiseDim,
                    std::span<double> out) {
  if (noiseDim == 0) throw std::invalid_argument("fillIncrements: noise dimension must be >= 1");
  if (out.size() != grid.steps() * noiseDim) {
    throw std::invalid_argument("fillIncrements: output size must be steps * noiseDim");
  }
  fillStandardNormals(key.streamId(), 0, out);
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double scale = std::sqrt(grid.step(i));
    for (std::size_t k = 0; k < noiseDim; ++k) out[i * noiseDim + k] *= scale;
  }
}

BrownianIncrements sampleIncrements(const SampleKey& key, const TimeGrid& grid, std::size_t noiseDim) {
  BrownianIncrements inc{grid, noiseDim, std::vector<double>(grid.steps() * noiseDim)};
  fillIncrements(key, grid, noiseDim, inc.dW);
  return inc;
}

void fillOuterIncrements(const SampleKey& parent, std::uint64_t sample, bool antithetic,
                         const TimeGrid& grid, std::size_t noiseDim, std::span<double> out) {
  if (!antithetic) {
    fillIncrements(parent.child(sample), grid, noiseDim, out);
    return;
  }
  fillIncrements(parent.child(sample / 2), grid, noiseDim, out);
  if (sample % 2 == 1) {
    for (double& x : out) x = -x;
  }
}

}  // namespace pathfbsde
