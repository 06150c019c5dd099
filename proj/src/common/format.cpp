#include "gpp/format.hpp"

#include <array>
#include <charconv>
#include <stdexcept>
#include <system_error>

namespace gpp {

std::string format_double(double value, int digits) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, digits);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), end);
}

double parse_double(const std::string& text) {
  double out = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last || text.empty())
    throw std::invalid_argument("not a number: '" + text + "'");
  return out;
}

}  // namespace gpp
