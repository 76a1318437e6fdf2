#include "esp/csv.hpp"

#include <charconv>
#include <cmath>

namespace esp {

std::string format_double(double value) {
  if (value == 0.0) return "0";  // avoid "-0"
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace esp
