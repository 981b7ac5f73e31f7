#include "pathfbsde/regression.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pathfbsde/errors.hpp"

namespace pathfbsde {

RegressionAccumulator::RegressionAccumulator(std::size_t features, std::size_t targets)
    : p_(features), q_(targets), gram_(features * features, 0.0), rhs_(features * targets, 0.0),
      sumSq_(targets, 0.0) {
  if (features == 0 || targets == 0) {
    throw std::invalid_argument("RegressionAccumulator: need at least one feature and one target");
  }
}

void RegressionAccumulator::addGram(std::span<const double> phi) noexcept {
  for (std::size_t a = 0; a < p_; ++a) {
    const double pa = phi[a];
    double* row = gram_.data() + a * p_;
    for (std::size_t b = a; b < p_; ++b) row[b] += pa * phi[b];
  }
}

void RegressionAccumulator::addTargets(std::span<const double> phi, std::span<const double> y) noexcept {
  for (std::size_t q = 0; q < q_; ++q) {
    const double yq = y[q];
    double* r = rhs_.data() + q * p_;
    for (std::size_t a = 0; a < p_; ++a) r[a] += phi[a] * yq;
    sumSq_[q] += yq * yq;
  }
  ++n_;
}

void RegressionAccumulator::add(std::span<const double> phi, std::span<const double> y) noexcept {
  addGram(phi);
  addTargets(phi, y);
}

void RegressionAccumulator::merge(const RegressionAccumulator& other) {
  if (other.p_ != p_ || other.q_ != q_) throw std::invalid_argument("RegressionAccumulator: shape mismatch");
  for (std::size_t j = 0; j < gram_.size(); ++j) gram_[j] += other.gram_[j];
  for (std::size_t j = 0; j < rhs_.size(); ++j) rhs_[j] += other.rhs_[j];
  for (std::size_t j = 0; j < sumSq_.size(); ++j) sumSq_[j] += other.sumSq_[j];
  n_ += other.n_;
}

void RegressionAccumulator::setGram(const RegressionAccumulator& other) {
  if (other.p_ != p_) throw std::invalid_argument("RegressionAccumulator: shape mismatch");
  gram_ = other.gram_;
}

std::vector<double> RegressionAccumulator::gram() const {
  std::vector<double> g(p_ * p_);
  for (std::size_t a = 0; a < p_; ++a) {
    for (std::size_t b = a; b < p_; ++b) g[a * p_ + b] = g[b * p_ + a] = gram_[a * p_ + b];
  }
  return g;
}

double RegressionRow::predictionStdError(std::span<const double> phi, std::size_t target) const noexcept {
  double quad = 0.0;
  for (std::size_t a = 0; a < features; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < features; ++b) s += covariance[a * features + b] * phi[b];
    quad += phi[a] * s;
  }
  return std::sqrt(std::max(0.0, quad * residualVariance[target]));
}

RegressionRow RegressionRow::constant(std::size_t features, std::vector<double> values) {
  RegressionRow row;
  row.features = features;
  row.targets = values.size();
  row.beta.assign(features * values.size(), 0.0);
  for (std::size_t q = 0; q < values.size(); ++q) row.beta[q * features] = values[q];
  row.covariance.assign(features * features, 0.0);
  row.residualVariance.assign(values.size(), 0.0);
  return row;
}

RegressionRow solveRegression(const RegressionAccumulator& acc, double lambda) {
  const std::size_t p = acc.features(), q = acc.targets();
  if (acc.samples() < p) {
    throw std::invalid_argument("regression: " + std::to_string(acc.samples()) + " samples for " +
                                std::to_string(p) + " features");
  }
  if (!(lambda >= 0.0)) throw std::invalid_argument("regression: ridge parameter must be >= 0");

  const std::vector<double> g = acc.gram();
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gram(
      g.data(), static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  Eigen::MatrixXd rhs(p, q);
  for (std::size_t t = 0; t < q; ++t) {
    for (std::size_t a = 0; a < p; ++a) rhs(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(t)) = acc.rhs(t, a);
  }
  if (!rhs.allFinite()) throw NumericalError("regression: non-finite targets");

  auto factor = [&](double ridge) {
    Eigen::MatrixXd m = gram;
    m.diagonal().array() += ridge;
    return Eigen::LLT<Eigen::MatrixXd>(m);
  };
  auto usable = [](const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return llt.info() == Eigen::Success && llt.rcond() > 1e-12;
  };

  double used = lambda;
  auto llt = factor(used);
  if (!usable(llt) && lambda == 0.0) {
    used = 1e-8 * gram.trace() / static_cast<double>(p);
    llt = factor(used);
  }
  if (llt.info() != Eigen::Success) {
    throw NumericalError("regression: Gram matrix is not positive definite (lambda = " + std::to_string(used) + ")");
  }

  const Eigen::MatrixXd beta = llt.solve(rhs);
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));

  RegressionRow row;
  row.features = p;
  row.targets = q;
  row.lambda = used;
  row.samples = acc.samples();
  row.beta.resize(p * q);
  row.residualVariance.resize(q);
  const double dof = std::max<double>(1.0, static_cast<double>(acc.samples()) - static_cast<double>(p));
  for (std::size_t t = 0; t < q; ++t) {
    const Eigen::VectorXd b = beta.col(static_cast<Eigen::Index>(t));
    for (std::size_t a = 0; a < p; ++a) row.beta[t * p + a] = b(static_cast<Eigen::Index>(a));
    const double rss = acc.sumSquares(t) - 2.0 * b.dot(rhs.col(static_cast<Eigen::Index>(t))) + b.dot(gram * b);
    row.residualVariance[t] = std::max(0.0, rss) / dof;
  }
  row.covariance.resize(p * p);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) row.covariance[a * p + b] = cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  return row;
}

RegressionRow fitRegression(std::span<const RegressionSample> samples, const FeatureMap& features, double lambda) {
  RegressionAccumulator acc(features.size(), 1);
  std::vector<double> phi(features.size());
  for (const auto& s : samples) {
    if (!std::isfinite(s.target)) throw std::invalid_argument("fitRegression: non-finite target");
    features.compute(s.prefix, phi);
    const double y[1] = {s.target};
    acc.add(phi, y);
  }
  return solveRegression(acc, lambda);
}

}  // namespace pathfbsde
