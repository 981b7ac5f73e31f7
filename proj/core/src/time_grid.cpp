#include "pathfbsde/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pathfbsde {

bool sameTime(double a, double b) noexcept {
  return std::abs(a - b) <= 1e-12 * (1.0 + std::max(std::abs(a), std::abs(b)));
}

TimeGrid::TimeGrid(std::vector<double> nodes) {
  if (nodes.size() < 2) {
    throw std::invalid_argument("TimeGrid: need at least two nodes (n >= 1)");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!std::isfinite(nodes[i])) {
      throw std::invalid_argument("TimeGrid: non-finite node at index " + std::to_string(i));
    }
    if (i > 0 && !(nodes[i] > nodes[i - 1])) {
      throw std::invalid_argument("TimeGrid: nodes must be strictly increasing (index " +
                                  std::to_string(i) + ")");
    }
    if (i > 0) mesh_ = std::max(mesh_, nodes[i] - nodes[i - 1]);
  }
  nodes_ = std::make_shared<const std::vector<double>>(std::move(nodes));
}

TimeGrid TimeGrid::uniform(double start, double horizon, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("TimeGrid::uniform: steps must be >= 1");
  if (!(horizon > start)) throw std::invalid_argument("TimeGrid::uniform: horizon must exceed start");
  std::vector<double> nodes(steps + 1);
  const double width = horizon - start;
  for (std::size_t i = 0; i <= steps; ++i) {
    nodes[i] = start + width * (static_cast<double>(i) / static_cast<double>(steps));
  }
  nodes.back() = horizon;
  return TimeGrid(std::move(nodes));
}

std::size_t TimeGrid::indexAt(double s) const noexcept {
  const auto& v = *nodes_;
  auto it = std::upper_bound(v.begin(), v.end(), s);
  if (it == v.begin()) return 0;
  return static_cast<std::size_t>(it - v.begin()) - 1;
}

std::vector<std::size_t> TimeGrid::embed(const TimeGrid& coarse) const {
  std::vector<std::size_t> map;
  map.reserve(coarse.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    while (j < size() && (*nodes_)[j] < coarse[i] && !sameTime((*nodes_)[j], coarse[i])) ++j;
    if (j == size() || !sameTime((*nodes_)[j], coarse[i])) {
      throw std::invalid_argument("TimeGrid: coarse node " + std::to_string(coarse[i]) +
                                  " is not a node of the fine grid");
    }
    map.push_back(j);
  }
  return map;
}

bool TimeGrid::refines(const TimeGrid& coarse) const noexcept {
  try {
    (void)embed(coarse);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

bool TimeGrid::operator==(const TimeGrid& other) const noexcept {
  if (nodes_ == other.nodes_) return true;
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!sameTime((*nodes_)[i], other[i])) return false;
  }
  return true;
}

}  // namespace pathfbsde
