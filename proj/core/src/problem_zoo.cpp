#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pathfbsde/coefficients.hpp"

namespace pathfbsde {

namespace {

double normalPdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double normalTail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

ProblemParams merge(std::string_view name, ProblemParams defaults, const ProblemParams& overrides) {
  for (const auto& [key, value] : overrides) {
    auto it = defaults.find(key);
    if (it == defaults.end()) {
      std::string known;
      for (const auto& [k, v] : defaults) known += (known.empty() ? "" : ", ") + k;
      throw std::invalid_argument("problem '" + std::string(name) + "' has no parameter '" + key +
                                  "' (known: " + known + ")");
    }
    if (!std::isfinite(value)) throw std::invalid_argument("parameter '" + key + "' must be finite");
    it->second = value;
  }
  if (!(defaults.at("T") > 0.0)) throw std::invalid_argument("parameter 'T' must be positive");
  return defaults;
}

// Scalar Brownian-type problems share b = drift, sigma = vol, g = omega(T).
CoefficientSet scalarBase(std::string name, double drift, double vol) {
  CoefficientSet cs;
  cs.name = std::move(name);
  cs.dims = {1, 1};
  cs.drift = [drift](double, const StoppedView&, std::span<double> out) { out[0] = drift; };
  cs.diffusion = [vol](double, const StoppedView&, std::span<double> out) { out[0] = vol; };
  cs.driver = [](double, const StoppedView&, double, std::span<const double>) { return 0.0; };
  cs.terminal = [](const DiscretePath& x) { return x.terminal()[0]; };
  cs.lipschitz.terminal = 1.0;
  cs.zeroPathBound = std::max(std::abs(drift), std::abs(vol));
  return cs;
}

double currentValue(const DiscretePath& history) { return history.terminal()[0]; }

Problem bmTerminal(const ProblemParams& p) {
  Problem out;
  out.params = p;
  out.horizon = p.at("T");
  out.coefficients = scalarBase("bm-terminal", 0.0, 1.0);
  out.reference.valueAt = [](double, const DiscretePath& h) { return currentValue(h); };
  out.reference.zAt = [](double, const DiscretePath&) { return std::vector<double>{1.0}; };
  return out;
}

Problem abmLinear(const ProblemParams& p) {
  const double mu = p.at("mu"), s0 = p.at("s0"), T = p.at("T");
  Problem out;
  out.params = p;
  out.horizon = T;
  out.coefficients = scalarBase("abm-linear", mu, s0);
  out.reference.valueAt = [mu, T](double t, const DiscretePath& h) { return currentValue(h) + mu * (T - t); };
  out.reference.zAt = [s0](double, const DiscretePath&) { return std::vector<double>{s0}; };
  return out;
}

Problem bmLookback(const ProblemParams& p) {
  const double T = p.at("T");
  Problem out;
  out.params = p;
  out.horizon = T;
  out.coefficients = scalarBase("bm-lookback", 0.0, 1.0);
  out.coefficients.terminal = [](const DiscretePath& x) { return x.runningMax(x.nodeCount() - 1, 0); };
  // Running max of x + W over a window of length tau has the law of x + |N(0, tau)|
  // (reflection principle), so E[max(m, x + M)] = m + 2 E[(sqrt(tau) Z - (m - x))^+].
  out.reference.valueAt = [T](double t, const DiscretePath& h) {
    const double x = currentValue(h);
    const double m = h.runningMax(h.nodeCount() - 1, 0);
    const double tau = T - t;
    if (tau <= 0.0) return m;
    const double a = m - x, s = std::sqrt(tau);
    return m + 2.0 * (s * normalPdf(a / s) - a * normalTail(a / s));
  };
  out.reference.zAt = [T](double t, const DiscretePath& h) {
    const double a = h.runningMax(h.nodeCount() - 1, 0) - currentValue(h);
    const double tau = T - t;
    if (tau <= 0.0) return std::vector<double>{0.0};
    return std::vector<double>{2.0 * normalTail(a / std::sqrt(tau))};
  };
  out.reference.oracleRecipe =
      "continuous-monitoring value; cross-check by fine-grid Monte Carlo of the discrete running max";
  // Discrete monitoring of the maximum is biased low by about 0.5826 sqrt(|pi|).
  out.reference.tolerance = 0.03;
  return out;
}

Problem discountedTerminal(const ProblemParams& p) {
  const double r = p.at("r"), c = p.at("c"), T = p.at("T");
  Problem out;
  out.params = p;
  out.horizon = T;
  auto& cs = out.coefficients;
  cs = scalarBase("discounted-terminal", 0.0, 1.0);
  cs.driver = [r](double, const StoppedView&, double y, std::span<const double>) { return -r * y; };
  cs.terminal = [c](const DiscretePath& x) { return x.terminal()[0] + c; };
  cs.lipschitz.driver = std::abs(r);
  cs.zeroPathBound = std::max(1.0, std::abs(c));
  out.reference.valueAt = [r, c, T](double t, const DiscretePath& h) {
    return std::exp(-r * (T - t)) * (currentValue(h) + c);
  };
  out.reference.zAt = [r, T](double t, const DiscretePath&) {
    return std::vector<double>{std::exp(-r * (T - t))};
  };
  return out;
}

Problem zDriver(const ProblemParams& p) {
  const double a = p.at("a"), T = p.at("T");
  Problem out;
  out.params = p;
  out.horizon = T;
  auto& cs = out.coefficients;
  cs = scalarBase("z-driver", 0.0, 1.0);
  cs.driver = [a](double, const StoppedView&, double, std::span<const double> z) { return a * z[0]; };
  cs.lipschitz.driver = std::abs(a);
  out.reference.valueAt = [a, T](double t, const DiscretePath& h) { return currentValue(h) + a * (T - t); };
  out.reference.zAt = [](double, const DiscretePath&) { return std::vector<double>{1.0}; };
  return out;
}

Problem pathSigma(const ProblemParams& p) {
  const double base = p.at("base"), amp = p.at("amp"), T = p.at("T");
  Problem out;
  out.params = p;
  out.horizon = T;
  auto& cs = out.coefficients;
  cs = scalarBase("path-sigma", 0.0, base);
  cs.diffusion = [base, amp](double, const StoppedView& x, std::span<double> out) {
    out[0] = base + amp * std::tanh(x.runningSupNorm());
  };
  cs.lipschitz.diffusion = std::abs(amp);
  cs.zeroPathBound = std::abs(base);
  // X is a martingale (b = 0) and g(omega) = omega(T), so Y = X and Z = sigma.
  out.reference.valueAt = [](double, const DiscretePath& h) { return currentValue(h); };
  out.reference.zAt = [base, amp](double, const DiscretePath& h) {
    return std::vector<double>{base + amp * std::tanh(h.supNorm())};
  };
  out.reference.oracleRecipe = "X has no closed form; strong errors use a coupled fine-grid Euler reference";
  return out;
}

struct Entry {
  const char* name;
  ProblemParams defaults;
  Problem (*make)(const ProblemParams&);
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {"bm-terminal", {{"T", 1.0}}, &bmTerminal},
      {"abm-linear", {{"T", 1.0}, {"mu", 0.5}, {"s0", 2.0}}, &abmLinear},
      {"bm-lookback", {{"T", 1.0}}, &bmLookback},
      {"discounted-terminal", {{"T", 1.0}, {"r", 0.5}, {"c", 1.0}}, &discountedTerminal},
      {"z-driver", {{"T", 1.0}, {"a", 0.3}}, &zDriver},
      {"path-sigma", {{"T", 1.0}, {"base", 0.2}, {"amp", 0.1}}, &pathSigma},
  };
  return entries;
}

}  // namespace

std::vector<std::string> registeredProblems() {
  std::vector<std::string> names;
  for (const auto& e : registry()) names.emplace_back(e.name);
  return names;
}

Problem problemZoo(std::string_view name, const ProblemParams& overrides) {
  for (const auto& e : registry()) {
    if (name == e.name) return e.make(merge(name, e.defaults, overrides));
  }
  std::string known;
  for (const auto& e : registry()) known += (known.empty() ? "" : ", ") + std::string(e.name);
  throw std::invalid_argument("unknown problem '" + std::string(name) + "'; registered: " + known);
}

}  // namespace pathfbsde
