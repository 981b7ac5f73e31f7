#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "pathfbsde/time_grid.hpp"

namespace pathfbsde {

class StoppedView;
class PathBuilder;

/// A right-continuous, piecewise-constant path in R^d.
///
/// The path is stored as a history segment (breakpoints strictly before the
/// first node) followed by values at node times. Evaluation is step
/// evaluation: on [tau_k, tau_{k+1}) the path takes the k-th value, before
/// the first breakpoint it takes the first value, and past the last node it
/// stays at the terminal value (stopped-path extension).
///
/// Prefix statistics (running sup-norm, per-coordinate running max/min and
/// the mean of node values) are kept per node so that path-dependent
/// functionals of a stopped path cost O(1) at node times.
class DiscretePath {
 public:
  /// `historyValues` and `nodeValues` are row-major (one row of `dim` values
  /// per breakpoint). History times must be strictly increasing and strictly
  /// below the first node time.
  DiscretePath(std::size_t dim, std::vector<double> historyTimes, std::vector<double> historyValues,
               std::vector<double> nodeTimes, std::vector<double> nodeValues);

  /// Path with no history and one node per grid node.
  DiscretePath(const TimeGrid& grid, std::vector<double> nodeValues, std::size_t dim);

  /// Constant path on [0, time] represented by a single node at `time`.
  static DiscretePath constant(std::size_t dim, double value, double time = 0.0);

  std::size_t dim() const noexcept { return dim_; }

  std::size_t historySize() const noexcept;
  double historyTime(std::size_t k) const noexcept;
  std::span<const double> historyValue(std::size_t k) const noexcept;

  std::size_t nodeCount() const noexcept { return nodeTimes_->size(); }
  double nodeTime(std::size_t i) const noexcept { return (*nodeTimes_)[i]; }
  std::span<const double> nodeTimes() const noexcept { return *nodeTimes_; }
  std::span<const double> nodeValue(std::size_t i) const noexcept {
    return {nodeValues_.data() + i * dim_, dim_};
  }

  double startTime() const noexcept { return nodeTimes_->front(); }
  double horizon() const noexcept { return nodeTimes_->back(); }
  std::span<const double> terminal() const noexcept { return nodeValue(nodeCount() - 1); }

  std::span<const double> evaluate(double s) const noexcept;

  /// max over all breakpoints of the Euclidean norm of the value.
  double supNorm() const noexcept { return runSup_.back(); }

  double runningSupNorm(std::size_t node) const noexcept { return runSup_[node]; }
  double runningMax(std::size_t node, std::size_t k) const noexcept { return runMax_[node * dim_ + k]; }
  double runningMin(std::size_t node, std::size_t k) const noexcept { return runMin_[node * dim_ + k]; }
  /// Arithmetic mean of the node values 0..node (history excluded).
  double runningMean(std::size_t node, std::size_t k) const noexcept {
    return runSum_[node * dim_ + k] / static_cast<double>(node + 1);
  }

  StoppedView stoppedAt(double s) const noexcept;
  StoppedView atNode(std::size_t i) const noexcept;

  /// All breakpoint times, history first.
  std::vector<double> breakpoints() const;

  /// The same function on [0, horizon()] re-expressed as a history whose
  /// single node is the terminal value. Used to start a scheme from gamma_t.
  DiscretePath asHistory() const;

  /// Representation equality (same breakpoints and values, bit-exact).
  bool operator==(const DiscretePath& other) const noexcept;

 private:
  struct History {
    std::vector<double> times;
    std::vector<double> values;
    double supNorm = 0.0;
    std::vector<double> max;
    std::vector<double> min;
  };

  friend class PathBuilder;
  friend class StoppedView;

  DiscretePath() = default;
  void initHistory(std::vector<double> times, std::vector<double> values);
  void updateStats(std::size_t node) noexcept;

  std::size_t dim_ = 0;
  std::shared_ptr<const History> history_;
  std::shared_ptr<const std::vector<double>> nodeTimes_;
  std::vector<double> nodeValues_;
  std::vector<double> runSup_;
  std::vector<double> runMax_;
  std::vector<double> runMin_;
  std::vector<double> runSum_;
};

/// The stopped path omega_s = omega(s ^ .) as a non-owning view.
///
/// The base path must outlive the view.
class StoppedView {
 public:
  StoppedView(const DiscretePath& base, double stop) noexcept;

  double stopTime() const noexcept { return stop_; }
  std::size_t dim() const noexcept { return base_->dim(); }

  /// base(min(u, stop))
  std::span<const double> value(double u) const noexcept;
  std::span<const double> current() const noexcept;

  /// sup over u <= stop of |omega(u)|.
  double runningSupNorm() const noexcept;
  double runningMax(std::size_t k) const noexcept;
  double runningMin(std::size_t k) const noexcept;

  /// Index of the last node at or before the stop time, if any.
  bool hasNode() const noexcept { return node_ != kNoNode; }
  std::size_t node() const noexcept { return node_; }

  /// Escape hatch to the unstopped path. Functionals that read past
  /// stopTime() through this are anticipative; checkNonAnticipative flags them.
  const DiscretePath& base() const noexcept { return *base_; }

 private:
  friend class DiscretePath;
  static constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();
  StoppedView(const DiscretePath& base, double stop, std::size_t node) noexcept
      : base_(&base), stop_(stop), node_(node) {}

  const DiscretePath* base_;
  double stop_;
  std::size_t node_;
};

/// (omega (+)_s tilde)(u) = omega(u) on [0, s), tilde(u) - tilde(s) + omega(s) on [s, inf).
///
/// Throws std::invalid_argument on dimension mismatch or negative s.
DiscretePath concat(const DiscretePath& prefix, const DiscretePath& suffix, double s);

/// sup over u of |a(u) - b(u)|, exact for step paths.
double supDistance(const StoppedView& a, const StoppedView& b);

/// d_inf((s,a),(s',b)) = |s - s'| + ||a_s - b_s'||_inf
double dInfinity(const StoppedView& a, const StoppedView& b);

/// True when a and b agree at every breakpoint of either (pointwise equality
/// of the step functions).
bool pointwiseEqual(const DiscretePath& a, const DiscretePath& b, double tol = 0.0);

/// Incremental construction of a path on a grid, node by node.
///
/// Views handed out by view(i) are valid for filled nodes only; the builder
/// can be restart()ed to reuse its storage for the next sample.
class PathBuilder {
 public:
  /// Starts a path on `grid` whose history is `history` restricted to
  /// [0, grid.start()) and whose first node is history(grid.start()).
  /// Requires history.horizon() <= grid.start().
  PathBuilder(const DiscretePath& history, const TimeGrid& grid);

  /// Continues `prefix`, keeping its first `keep` nodes. The prefix nodes
  /// must coincide with the first `keep` grid nodes.
  PathBuilder(const DiscretePath& prefix, std::size_t keep, const TimeGrid& grid);

  void restart() noexcept { filled_ = initial_; }

  std::size_t filled() const noexcept { return filled_; }
  bool complete() const noexcept { return filled_ == path_.nodeCount(); }
  std::size_t dim() const noexcept { return path_.dim(); }

  StoppedView view(std::size_t node) const noexcept { return path_.atNode(node); }
  std::span<const double> node(std::size_t i) const noexcept { return path_.nodeValue(i); }

  void append(std::span<const double> value);

  /// The path under construction. Node values past filled() are unspecified.
  const DiscretePath& path() const noexcept { return path_; }

 private:
  DiscretePath path_;
  std::size_t initial_ = 0;
  std::size_t filled_ = 0;
};

}  // namespace pathfbsde
