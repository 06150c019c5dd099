#include "gpp/rng.hpp"

namespace gpp {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t index) noexcept {
  // Two rounds so that neighbouring bases and neighbouring indices both
  // land far apart.
  return splitmix64(splitmix64(base_seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

}  // namespace gpp
