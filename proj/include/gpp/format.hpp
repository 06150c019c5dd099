#pragma once

#include <string>

namespace gpp {

/// Locale-independent %.{digits}g. 17 digits round-trips every double.
std::string format_double(double value, int digits = 17);

/// Strict parse of a whole string as a double; throws std::invalid_argument.
double parse_double(const std::string& text);

}  // namespace gpp
