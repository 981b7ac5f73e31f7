#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace pathfbsde {

/// Partition t = t_0 < t_1 < ... < t_n = T of the simulation window.
///
/// Copies share the node storage, so passing grids around by value is cheap.
class TimeGrid {
 public:
  /// Throws std::invalid_argument unless the nodes are finite, strictly
  /// increasing and at least two of them are given.
  explicit TimeGrid(std::vector<double> nodes);

  static TimeGrid uniform(double start, double horizon, std::size_t steps);

  std::size_t steps() const noexcept { return nodes_->size() - 1; }
  std::size_t size() const noexcept { return nodes_->size(); }
  double operator[](std::size_t i) const noexcept { return (*nodes_)[i]; }
  double start() const noexcept { return nodes_->front(); }
  double horizon() const noexcept { return nodes_->back(); }
  double step(std::size_t i) const noexcept { return (*nodes_)[i + 1] - (*nodes_)[i]; }
  double mesh() const noexcept { return mesh_; }
  std::span<const double> nodes() const noexcept { return *nodes_; }

  /// Largest i with t_i <= s, clamped to [0, n].
  std::size_t indexAt(double s) const noexcept;

  /// For every node of `coarse`, the index of the matching node of *this.
  /// Throws std::invalid_argument when some coarse node is not a node here.
  std::vector<std::size_t> embed(const TimeGrid& coarse) const;
  bool refines(const TimeGrid& coarse) const noexcept;

  bool operator==(const TimeGrid& other) const noexcept;

  const std::shared_ptr<const std::vector<double>>& shared() const noexcept { return nodes_; }

 private:
  std::shared_ptr<const std::vector<double>> nodes_;
  double mesh_ = 0.0;
};

/// Node-time comparison used wherever two grids must line up.
bool sameTime(double a, double b) noexcept;

}  // namespace pathfbsde
