#include "pathfbsde/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pathfbsde {

double LipschitzConstants::max() const noexcept {
  return std::max({drift, diffusion, driver, terminal});
}

double frobenius(std::span<const double> a) noexcept {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

void CoefficientSet::validate() const {
  if (dims.state == 0 || dims.noise == 0) {
    throw std::invalid_argument("CoefficientSet '" + name + "': dimensions must be >= 1");
  }
  if (!drift || !diffusion || !driver || !terminal) {
    throw std::invalid_argument("CoefficientSet '" + name + "': all of b, sigma, f, g are required");
  }
}

}  // namespace pathfbsde
