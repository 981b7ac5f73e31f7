#pragma once

#include <string>
#include <string_view>

#include "pathfbsde/discrete_path.hpp"

namespace pathfbsde {

// Wire format:
//   {"d": 1, "history": [[0.0, [1.0]], ...], "grid": [t0, ..., tn], "values": [[x0], ..., [xn]]}

std::string toJson(const DiscretePath& path, int indent = -1);

/// Throws std::invalid_argument on malformed or inconsistent input.
DiscretePath pathFromJson(std::string_view text);

DiscretePath loadPath(const std::string& file);

}  // namespace pathfbsde
