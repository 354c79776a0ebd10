#pragma once

#include <string>

namespace arznet {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Fixed notation with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

} // namespace arznet
