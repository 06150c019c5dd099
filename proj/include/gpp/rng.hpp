#pragma once

#include <cstdint>
#include <random>

namespace gpp {

/// SplitMix64 output function. Used only to derive stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of stream `index` under `base_seed`. A pure function of both
/// arguments, so stream i never depends on how many streams came before it.
std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t index) noexcept;

/// One independent random stream. The engine output sequence is fixed by the
/// C++ standard, and the uniform mapping below is done by hand, so draws are
/// identical across compilers and standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1], 53 random bits.
  double uniform_open_closed() noexcept {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gpp
