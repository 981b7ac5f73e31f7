#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pathfbsde/discrete_path.hpp"

namespace pathfbsde {

struct Dimensions {
  std::size_t state = 1;  // d
  std::size_t noise = 1;  // l
};

/// Declared Lipschitz constants of each functional (Assumptions on b, sigma
/// in (s, omega); on f in (s, omega, y, z); on g in omega).
struct LipschitzConstants {
  double drift = 0.0;
  double diffusion = 0.0;
  double driver = 0.0;
  double terminal = 0.0;

  double max() const noexcept;
};

/// The non-anticipative coefficient functionals (b, sigma, f, g) of a
/// path-dependent FBSDE. Every functional receives the path stopped at the
/// evaluation time and must be a pure function of its arguments.
struct CoefficientSet {
  using VectorFunctional = std::function<void(double t, const StoppedView& x, std::span<double> out)>;
  using Driver = std::function<double(double t, const StoppedView& x, double y, std::span<const double> z)>;
  using Terminal = std::function<double(const DiscretePath& x)>;

  std::string name;
  Dimensions dims;
  VectorFunctional drift;      // writes d values
  VectorFunctional diffusion;  // writes d x l values, row-major
  Driver driver;
  Terminal terminal;
  LipschitzConstants lipschitz;
  /// Bound on |b|, ||sigma||, |f| and |g| at the zero path.
  double zeroPathBound = 0.0;

  /// Throws std::invalid_argument when a functional is missing or dims are zero.
  void validate() const;
};

/// Frobenius norm sqrt(tr(A^T A)).
double frobenius(std::span<const double> a) noexcept;

/// Carrier for the reference solution of a problem.
struct ReferenceSolution {
  enum class Kind { kExact, kOracle };

  Kind kind = Kind::kExact;
  /// Y(t, gamma_t). For kOracle problems this is the oracle's value and may be empty.
  std::function<double(double t, const DiscretePath& history)> valueAt;
  std::function<std::vector<double>(double t, const DiscretePath& history)> zAt;
  /// How to reproduce the reference when it is not closed-form.
  std::string oracleRecipe;
  double tolerance = 0.0;

  bool hasValue() const noexcept { return static_cast<bool>(valueAt); }
};

/// Named scalar parameters of a zoo problem (mu, s0, r, c, a, T, ...).
using ProblemParams = std::map<std::string, double, std::less<>>;

struct Problem {
  CoefficientSet coefficients;
  ReferenceSolution reference;
  double horizon = 1.0;
  ProblemParams params;
};

/// The registered problem names in registration order.
std::vector<std::string> registeredProblems();

/// Builds a zoo problem. Unknown parameter names and unknown problem names
/// throw std::invalid_argument; the latter lists the registered names.
Problem problemZoo(std::string_view name, const ProblemParams& overrides = {});

// ---------------------------------------------------------------------------
// Diagnostics

struct NonAnticipativityReport {
  double drift = 0.0;
  double diffusion = 0.0;
  double driver = 0.0;
  std::size_t probes = 0;

  double maxDiscrepancy() const noexcept;
  bool passed() const noexcept { return maxDiscrepancy() == 0.0; }
};

/// Evaluates b, sigma, f on random step paths and on copies perturbed
/// strictly after the stop time; any difference is a violation.
NonAnticipativityReport checkNonAnticipative(const CoefficientSet& cs, std::size_t probes,
                                             std::uint64_t seed);

struct LipschitzReport {
  LipschitzConstants observed;  // largest empirical ratio per functional
  LipschitzConstants declared;
  std::size_t probes = 0;

  bool passed() const noexcept;
};

/// Empirical ratios |dphi| / (sqrt|ds| + ||omega_s - omega'_s'||_inf [+ |dy| + |dz|]).
LipschitzReport checkLipschitz(const CoefficientSet& cs, std::size_t probes, std::uint64_t seed);

/// max of |b|, ||sigma||_F, |f| on the zero path over the given times, and |g(0)|.
double zeroPathMagnitude(const CoefficientSet& cs, std::span<const double> times);

}  // namespace pathfbsde
