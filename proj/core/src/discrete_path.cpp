#include "pathfbsde/discrete_path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pathfbsde {

namespace {

double norm(std::span<const double> v) noexcept {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void checkStrictlyIncreasing(const std::vector<double>& t, const char* what) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i])) throw std::invalid_argument(std::string(what) + ": non-finite time");
    if (i > 0 && !(t[i] > t[i - 1])) {
      throw std::invalid_argument(std::string(what) + ": times must be strictly increasing");
    }
  }
}

}  // namespace

void DiscretePath::initHistory(std::vector<double> times, std::vector<double> values) {
  if (values.size() != times.size() * dim_) {
    throw std::invalid_argument("DiscretePath: history values do not match d * history length");
  }
  checkStrictlyIncreasing(times, "DiscretePath history");
  auto h = std::make_shared<History>();
  h->max.assign(dim_, -std::numeric_limits<double>::infinity());
  h->min.assign(dim_, std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::span<const double> v(values.data() + k * dim_, dim_);
    h->supNorm = std::max(h->supNorm, norm(v));
    for (std::size_t c = 0; c < dim_; ++c) {
      h->max[c] = std::max(h->max[c], v[c]);
      h->min[c] = std::min(h->min[c], v[c]);
    }
  }
  h->times = std::move(times);
  h->values = std::move(values);
  history_ = std::move(h);
}

void DiscretePath::updateStats(std::size_t i) noexcept {
  auto v = nodeValue(i);
  const double prevSup = i == 0 ? history_->supNorm : runSup_[i - 1];
  runSup_[i] = std::max(prevSup, norm(v));
  for (std::size_t c = 0; c < dim_; ++c) {
    const std::size_t at = i * dim_ + c;
    const double prevMax = i == 0 ? history_->max[c] : runMax_[at - dim_];
    const double prevMin = i == 0 ? history_->min[c] : runMin_[at - dim_];
    const double prevSum = i == 0 ? 0.0 : runSum_[at - dim_];
    runMax_[at] = std::max(prevMax, v[c]);
    runMin_[at] = std::min(prevMin, v[c]);
    runSum_[at] = prevSum + v[c];
  }
}

DiscretePath::DiscretePath(std::size_t dim, std::vector<double> historyTimes,
                           std::vector<double> historyValues, std::vector<double> nodeTimes,
                           std::vector<double> nodeValues)
    : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("DiscretePath: dimension must be >= 1");
  if (nodeTimes.empty()) throw std::invalid_argument("DiscretePath: need at least one node");
  if (nodeValues.size() != nodeTimes.size() * dim) {
    throw std::invalid_argument("DiscretePath: node values do not match d * node count");
  }
  checkStrictlyIncreasing(nodeTimes, "DiscretePath nodes");
  if (!historyTimes.empty() && !(historyTimes.back() < nodeTimes.front())) {
    throw std::invalid_argument("DiscretePath: history breakpoints must precede the first node");
  }
  for (double x : nodeValues) {
    if (!std::isfinite(x)) throw std::invalid_argument("DiscretePath: non-finite node value");
  }
  for (double x : historyValues) {
    if (!std::isfinite(x)) throw std::invalid_argument("DiscretePath: non-finite history value");
  }
  initHistory(std::move(historyTimes), std::move(historyValues));
  nodeTimes_ = std::make_shared<const std::vector<double>>(std::move(nodeTimes));
  nodeValues_ = std::move(nodeValues);
  const std::size_t n = nodeTimes_->size();
  runSup_.resize(n);
  runMax_.resize(n * dim_);
  runMin_.resize(n * dim_);
  runSum_.resize(n * dim_);
  for (std::size_t i = 0; i < n; ++i) updateStats(i);
}

DiscretePath::DiscretePath(const TimeGrid& grid, std::vector<double> nodeValues, std::size_t dim)
    : DiscretePath(dim, {}, {}, std::vector<double>(grid.nodes().begin(), grid.nodes().end()),
                   std::move(nodeValues)) {
  nodeTimes_ = grid.shared();
}

DiscretePath DiscretePath::constant(std::size_t dim, double value, double time) {
  return DiscretePath(dim, {}, {}, {time}, std::vector<double>(dim, value));
}

std::size_t DiscretePath::historySize() const noexcept { return history_->times.size(); }

double DiscretePath::historyTime(std::size_t k) const noexcept { return history_->times[k]; }

std::span<const double> DiscretePath::historyValue(std::size_t k) const noexcept {
  return {history_->values.data() + k * dim_, dim_};
}

std::span<const double> DiscretePath::evaluate(double s) const noexcept {
  const auto& nodes = *nodeTimes_;
  if (s >= nodes.front()) {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), s);
    return nodeValue(static_cast<std::size_t>(it - nodes.begin()) - 1);
  }
  const auto& ht = history_->times;
  auto it = std::upper_bound(ht.begin(), ht.end(), s);
  if (it == ht.begin()) {
    // Before the first breakpoint: extend the first value backwards.
    return ht.empty() ? nodeValue(0) : historyValue(0);
  }
  return historyValue(static_cast<std::size_t>(it - ht.begin()) - 1);
}

StoppedView DiscretePath::stoppedAt(double s) const noexcept { return StoppedView(*this, s); }

StoppedView DiscretePath::atNode(std::size_t i) const noexcept {
  return StoppedView(*this, nodeTime(i), i);
}

std::vector<double> DiscretePath::breakpoints() const {
  std::vector<double> out(history_->times);
  out.insert(out.end(), nodeTimes_->begin(), nodeTimes_->end());
  return out;
}

DiscretePath DiscretePath::asHistory() const {
  std::vector<double> times(history_->times);
  std::vector<double> values(history_->values);
  for (std::size_t i = 0; i + 1 < nodeCount(); ++i) {
    times.push_back(nodeTime(i));
    auto v = nodeValue(i);
    values.insert(values.end(), v.begin(), v.end());
  }
  auto last = terminal();
  return DiscretePath(dim_, std::move(times), std::move(values), {horizon()},
                      std::vector<double>(last.begin(), last.end()));
}

bool DiscretePath::operator==(const DiscretePath& other) const noexcept {
  return dim_ == other.dim_ && history_->times == other.history_->times &&
         history_->values == other.history_->values && *nodeTimes_ == *other.nodeTimes_ &&
         nodeValues_ == other.nodeValues_;
}

// ---------------------------------------------------------------------------

StoppedView::StoppedView(const DiscretePath& base, double stop) noexcept
    : base_(&base), stop_(stop), node_(kNoNode) {
  const auto nodes = base.nodeTimes();
  if (stop >= nodes.front()) {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), stop);
    node_ = static_cast<std::size_t>(it - nodes.begin()) - 1;
  }
}

std::span<const double> StoppedView::value(double u) const noexcept {
  return base_->evaluate(std::min(u, stop_));
}

std::span<const double> StoppedView::current() const noexcept {
  if (node_ != kNoNode) return base_->nodeValue(node_);
  return base_->evaluate(stop_);
}

namespace {

// Number of history breakpoints that are active on [0, stop]; at least one
// when the history is non-empty (backward extension of the first value).
std::size_t activeHistory(const DiscretePath& p, double stop) {
  std::size_t k = 0;
  while (k < p.historySize() && p.historyTime(k) <= stop) ++k;
  return std::max<std::size_t>(k, p.historySize() > 0 ? 1 : 0);
}

}  // namespace

double StoppedView::runningSupNorm() const noexcept {
  if (node_ != kNoNode) return base_->runningSupNorm(node_);
  const std::size_t k = activeHistory(*base_, stop_);
  if (k == 0) return norm(base_->nodeValue(0));
  double s = 0.0;
  for (std::size_t j = 0; j < k; ++j) s = std::max(s, norm(base_->historyValue(j)));
  return s;
}

double StoppedView::runningMax(std::size_t c) const noexcept {
  if (node_ != kNoNode) return base_->runningMax(node_, c);
  const std::size_t k = activeHistory(*base_, stop_);
  if (k == 0) return base_->nodeValue(0)[c];
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) m = std::max(m, base_->historyValue(j)[c]);
  return m;
}

double StoppedView::runningMin(std::size_t c) const noexcept {
  if (node_ != kNoNode) return base_->runningMin(node_, c);
  const std::size_t k = activeHistory(*base_, stop_);
  if (k == 0) return base_->nodeValue(0)[c];
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) m = std::min(m, base_->historyValue(j)[c]);
  return m;
}

// ---------------------------------------------------------------------------

DiscretePath concat(const DiscretePath& prefix, const DiscretePath& suffix, double s) {
  if (prefix.dim() != suffix.dim()) {
    throw std::invalid_argument("concat: dimension mismatch (" + std::to_string(prefix.dim()) +
                                " vs " + std::to_string(suffix.dim()) + ")");
  }
  if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("concat: splice time must be >= 0");
  const std::size_t d = prefix.dim();
  const auto anchor = prefix.evaluate(s);
  const auto origin = suffix.evaluate(s);

  std::vector<double> histT, histV, nodeT, nodeV;
  auto push = [d](std::vector<double>& t, std::vector<double>& v, double time,
                  std::span<const double> value) {
    t.push_back(time);
    v.insert(v.end(), value.begin(), value.begin() + static_cast<std::ptrdiff_t>(d));
  };

  for (std::size_t k = 0; k < prefix.historySize(); ++k) {
    if (prefix.historyTime(k) < s) push(histT, histV, prefix.historyTime(k), prefix.historyValue(k));
  }
  for (std::size_t i = 0; i < prefix.nodeCount(); ++i) {
    if (prefix.nodeTime(i) < s) push(nodeT, nodeV, prefix.nodeTime(i), prefix.nodeValue(i));
  }
  push(nodeT, nodeV, s, anchor);

  std::vector<double> shifted(d);
  for (double u : suffix.breakpoints()) {
    if (u <= s) continue;
    auto v = suffix.evaluate(u);
    for (std::size_t c = 0; c < d; ++c) shifted[c] = v[c] - origin[c] + anchor[c];
    push(nodeT, nodeV, u, shifted);
  }
  return DiscretePath(d, std::move(histT), std::move(histV), std::move(nodeT), std::move(nodeV));
}

double supDistance(const StoppedView& a, const StoppedView& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("supDistance: dimension mismatch");
  std::vector<double> times = a.base().breakpoints();
  auto tb = b.base().breakpoints();
  times.insert(times.end(), tb.begin(), tb.end());
  times.push_back(a.stopTime());
  times.push_back(b.stopTime());
  double best = 0.0;
  for (double u : times) {
    auto va = a.value(u);
    auto vb = b.value(u);
    double s = 0.0;
    for (std::size_t c = 0; c < va.size(); ++c) s += (va[c] - vb[c]) * (va[c] - vb[c]);
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

double dInfinity(const StoppedView& a, const StoppedView& b) {
  return std::abs(a.stopTime() - b.stopTime()) + supDistance(a, b);
}

bool pointwiseEqual(const DiscretePath& a, const DiscretePath& b, double tol) {
  if (a.dim() != b.dim()) return false;
  const double far = std::max(a.horizon(), b.horizon());
  return supDistance(a.stoppedAt(far), b.stoppedAt(far)) <= tol;
}

// ---------------------------------------------------------------------------

PathBuilder::PathBuilder(const DiscretePath& history, const TimeGrid& grid) {
  const double t0 = grid.start();
  if (history.horizon() > t0 && !sameTime(history.horizon(), t0)) {
    throw std::invalid_argument("PathBuilder: history extends past the grid start");
  }
  const std::size_t d = history.dim();
  std::vector<double> times, values;
  auto keep = [&](double u, std::span<const double> v) {
    if (u < t0 && !sameTime(u, t0)) {
      times.push_back(u);
      values.insert(values.end(), v.begin(), v.end());
    }
  };
  for (std::size_t k = 0; k < history.historySize(); ++k) keep(history.historyTime(k), history.historyValue(k));
  for (std::size_t i = 0; i < history.nodeCount(); ++i) keep(history.nodeTime(i), history.nodeValue(i));

  path_.dim_ = d;
  path_.initHistory(std::move(times), std::move(values));
  path_.nodeTimes_ = grid.shared();
  path_.nodeValues_.assign(grid.size() * d, 0.0);
  path_.runSup_.assign(grid.size(), 0.0);
  path_.runMax_.assign(grid.size() * d, 0.0);
  path_.runMin_.assign(grid.size() * d, 0.0);
  path_.runSum_.assign(grid.size() * d, 0.0);
  append(history.evaluate(t0));
  initial_ = 1;
}

PathBuilder::PathBuilder(const DiscretePath& prefix, std::size_t keep, const TimeGrid& grid) {
  if (keep == 0 || keep > prefix.nodeCount() || keep > grid.size()) {
    throw std::invalid_argument("PathBuilder: invalid number of prefix nodes to keep");
  }
  for (std::size_t i = 0; i < keep; ++i) {
    if (!sameTime(prefix.nodeTime(i), grid[i])) {
      throw std::invalid_argument("PathBuilder: prefix node " + std::to_string(i) +
                                  " does not sit on the grid");
    }
  }
  const std::size_t d = prefix.dim();
  path_.dim_ = d;
  path_.history_ = prefix.history_;
  path_.nodeTimes_ = grid.shared();
  path_.nodeValues_.assign(grid.size() * d, 0.0);
  path_.runSup_.assign(grid.size(), 0.0);
  path_.runMax_.assign(grid.size() * d, 0.0);
  path_.runMin_.assign(grid.size() * d, 0.0);
  path_.runSum_.assign(grid.size() * d, 0.0);
  for (std::size_t i = 0; i < keep; ++i) append(prefix.nodeValue(i));
  initial_ = keep;
}

void PathBuilder::append(std::span<const double> value) {
  if (filled_ >= path_.nodeCount()) throw std::logic_error("PathBuilder: path already complete");
  const std::size_t d = path_.dim_;
  std::copy_n(value.begin(), d, path_.nodeValues_.begin() + static_cast<std::ptrdiff_t>(filled_ * d));
  path_.updateStats(filled_);
  ++filled_;
}

}  // namespace pathfbsde
