#include <algorithm>
#include <cmath>
#include <random>

#include "pathfbsde/coefficients.hpp"

namespace pathfbsde {

namespace {

DiscretePath randomStepPath(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_int_distribution<int> historyCount(0, 3);
  std::uniform_int_distribution<int> nodeCount(2, 12);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> histT, histV, nodeT, nodeV;
  const int h = historyCount(rng);
  double t = 0.0;
  for (int k = 0; k < h; ++k) {
    histT.push_back(t);
    for (std::size_t c = 0; c < dim; ++c) histV.push_back(normal(rng));
    t += 0.01 + 0.1 * unit(rng);
  }
  const int n = nodeCount(rng);
  for (int i = 0; i < n; ++i) {
    nodeT.push_back(t);
    for (std::size_t c = 0; c < dim; ++c) nodeV.push_back(normal(rng));
    t += 0.01 + 0.2 * unit(rng);
  }
  return DiscretePath(dim, std::move(histT), std::move(histV), std::move(nodeT), std::move(nodeV));
}

// Same breakpoints, values replaced strictly after `stop`.
DiscretePath perturbAfter(const DiscretePath& p, double stop, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t d = p.dim();
  std::vector<double> histT, histV, nodeT, nodeV;
  for (std::size_t k = 0; k < p.historySize(); ++k) {
    histT.push_back(p.historyTime(k));
    for (std::size_t c = 0; c < d; ++c) {
      histV.push_back(p.historyTime(k) > stop ? p.historyValue(k)[c] + 1.0 + normal(rng) : p.historyValue(k)[c]);
    }
  }
  for (std::size_t i = 0; i < p.nodeCount(); ++i) {
    nodeT.push_back(p.nodeTime(i));
    for (std::size_t c = 0; c < d; ++c) {
      nodeV.push_back(p.nodeTime(i) > stop ? p.nodeValue(i)[c] + 1.0 + normal(rng) : p.nodeValue(i)[c]);
    }
  }
  return DiscretePath(d, std::move(histT), std::move(histV), std::move(nodeT), std::move(nodeV));
}

// Same breakpoints, every value moved by at most `scale`.
DiscretePath jitter(const DiscretePath& p, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  const std::size_t d = p.dim();
  std::vector<double> histT, histV, nodeT, nodeV;
  for (std::size_t k = 0; k < p.historySize(); ++k) {
    histT.push_back(p.historyTime(k));
    for (std::size_t c = 0; c < d; ++c) histV.push_back(p.historyValue(k)[c] + u(rng));
  }
  for (std::size_t i = 0; i < p.nodeCount(); ++i) {
    nodeT.push_back(p.nodeTime(i));
    for (std::size_t c = 0; c < d; ++c) nodeV.push_back(p.nodeValue(i)[c] + u(rng));
  }
  return DiscretePath(d, std::move(histT), std::move(histV), std::move(nodeT), std::move(nodeV));
}

double maxAbsDiff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

double NonAnticipativityReport::maxDiscrepancy() const noexcept {
  return std::max({drift, diffusion, driver});
}

NonAnticipativityReport checkNonAnticipative(const CoefficientSet& cs, std::size_t probes,
                                             std::uint64_t seed) {
  cs.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t d = cs.dims.state, l = cs.dims.noise;
  std::vector<double> b1(d), b2(d), s1(d * l), s2(d * l), z(l);

  NonAnticipativityReport report;
  report.probes = probes;
  for (std::size_t p = 0; p < probes; ++p) {
    const DiscretePath path = randomStepPath(rng, d);
    std::uniform_real_distribution<double> pick(0.0, path.horizon());
    const double stop = pick(rng);
    const DiscretePath other = perturbAfter(path, stop, rng);
    const StoppedView v1(path, stop), v2(other, stop);

    cs.drift(stop, v1, b1);
    cs.drift(stop, v2, b2);
    report.drift = std::max(report.drift, maxAbsDiff(b1, b2));
    cs.diffusion(stop, v1, s1);
    cs.diffusion(stop, v2, s2);
    report.diffusion = std::max(report.diffusion, maxAbsDiff(s1, s2));
    const double y = normal(rng);
    for (auto& zk : z) zk = normal(rng);
    report.driver = std::max(report.driver, std::abs(cs.driver(stop, v1, y, z) - cs.driver(stop, v2, y, z)));
  }
  return report;
}

bool LipschitzReport::passed() const noexcept {
  auto ok = [](double seen, double bound) { return seen <= bound * (1.0 + 1e-9) + 1e-12; };
  return ok(observed.drift, declared.drift) && ok(observed.diffusion, declared.diffusion) &&
         ok(observed.driver, declared.driver) && ok(observed.terminal, declared.terminal);
}

LipschitzReport checkLipschitz(const CoefficientSet& cs, std::size_t probes, std::uint64_t seed) {
  cs.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t d = cs.dims.state, l = cs.dims.noise;
  std::vector<double> b1(d), b2(d), sig1(d * l), sig2(d * l), z1(l), z2(l);

  LipschitzReport report;
  report.declared = cs.lipschitz;
  report.probes = probes;
  for (std::size_t p = 0; p < probes; ++p) {
    const DiscretePath path = randomStepPath(rng, d);
    // Alternate between nearby pairs (local constant) and unrelated pairs.
    const bool local = p % 2 == 0;
    const DiscretePath other = local ? jitter(path, std::pow(10.0, -1.0 - 4.0 * unit(rng)), rng)
                                     : randomStepPath(rng, d);
    const double s = path.horizon() * unit(rng);
    const double sOther = local ? std::min(other.horizon(), s + 1e-4 * unit(rng)) : other.horizon() * unit(rng);
    const StoppedView v1(path, s), v2(other, sOther);
    const double base = std::sqrt(std::abs(s - sOther)) + supDistance(v1, v2);
    if (base <= 0.0) continue;

    cs.drift(s, v1, b1);
    cs.drift(sOther, v2, b2);
    report.observed.drift = std::max(report.observed.drift, euclid(b1, b2) / base);
    cs.diffusion(s, v1, sig1);
    cs.diffusion(sOther, v2, sig2);
    report.observed.diffusion = std::max(report.observed.diffusion, euclid(sig1, sig2) / base);

    const double y1 = normal(rng);
    const double y2 = local ? y1 + 1e-3 * normal(rng) : normal(rng);
    for (std::size_t k = 0; k < l; ++k) {
      z1[k] = normal(rng);
      z2[k] = local ? z1[k] + 1e-3 * normal(rng) : normal(rng);
    }
    const double dz = euclid(z1, z2);
    report.observed.driver =
        std::max(report.observed.driver,
                 std::abs(cs.driver(s, v1, y1, z1) - cs.driver(sOther, v2, y2, z2)) / (base + std::abs(y1 - y2) + dz));

    // g is compared on full paths.
    const double far = std::max(path.horizon(), other.horizon());
    const double full = supDistance(path.stoppedAt(far), other.stoppedAt(far));
    if (full > 0.0) {
      report.observed.terminal =
          std::max(report.observed.terminal, std::abs(cs.terminal(path) - cs.terminal(other)) / full);
    }
  }
  return report;
}

double zeroPathMagnitude(const CoefficientSet& cs, std::span<const double> times) {
  cs.validate();
  const std::size_t d = cs.dims.state, l = cs.dims.noise;
  const double horizon = times.empty() ? 1.0 : *std::max_element(times.begin(), times.end());
  const DiscretePath zero(d, {}, {}, {0.0, std::max(horizon, 1e-9)}, std::vector<double>(2 * d, 0.0));
  std::vector<double> b(d), s(d * l), z(l, 0.0);
  double m = std::abs(cs.terminal(zero));
  for (double t : times) {
    const StoppedView v(zero, t);
    cs.drift(t, v, b);
    cs.diffusion(t, v, s);
    m = std::max({m, frobenius(b), frobenius(s), std::abs(cs.driver(t, v, 0.0, z))});
  }
  return m;
}

}  // namespace pathfbsde
