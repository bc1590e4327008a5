#pragma once

#include <ostream>
#include <string>

namespace tactsim {

// Shortest decimal representation that parses back to the same double.
std::string format_number(double value);

// One decimal place, halves rounded away from zero (86.25 -> "86.3").
std::string format_fixed1(double value);

std::string format_int(long long value);

}  // namespace tactsim
