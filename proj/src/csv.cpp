#include "tactsim/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace tactsim {

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, ptr);
}

std::string format_fixed1(double value) {
  // std::round halves go away from zero, which printf's %.1f does not
  // guarantee (banker's rounding on exact halves).
  double scaled = std::round(value * 10.0) / 10.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", scaled);
  return buf;
}

std::string format_int(long long value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace tactsim
