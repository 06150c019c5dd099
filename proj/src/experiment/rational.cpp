#include <charconv>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gpp/experiment.hpp"

namespace gpp {

namespace {

std::int64_t parse_int(std::string_view text, std::string_view whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument("not a ratio: '" + std::string(whole) + "'");
  return v;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (num <= 0 || den <= 0) throw std::invalid_argument("ratio terms must be positive");
  const std::int64_t g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

Rational Rational::parse(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  const auto last = text.find_last_not_of(" \t");
  if (first == std::string_view::npos) throw std::invalid_argument("empty ratio");
  const std::string_view t = text.substr(first, last - first + 1);
  const auto slash = t.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(t, t), 1);
  return Rational(parse_int(t.substr(0, slash), t), parse_int(t.substr(slash + 1), t));
}

std::string Rational::str() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace gpp
