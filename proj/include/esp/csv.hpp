#pragma once

#include <string>

namespace esp {

// Shortest decimal representation that round-trips the double; keeps CSV
// output byte-stable across runs.
std::string format_double(double value);

}  // namespace esp
