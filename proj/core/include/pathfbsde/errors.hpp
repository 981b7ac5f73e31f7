#pragma once

#include <stdexcept>
#include <string>

namespace pathfbsde {

/// A numerical failure during simulation or estimation (non-finite values,
/// a fixed point that does not converge, ...). Precondition violations use
/// std::invalid_argument instead.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pathfbsde
