#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <unistd.h>

namespace gpp_test {

/// Sums f(0), f(1), ... until the running mass reaches 1 - 1e-12 and the
/// last term is below 1e-15 of the sum, or n reaches max_terms.
inline double tail_sum(const std::function<double(std::uint64_t)>& term, const std::function<double(std::uint64_t)>& mass,
                       std::uint64_t max_terms = 10'000'000) {
  double total = 0.0, seen = 0.0;
  for (std::uint64_t n = 0; n < max_terms; ++n) {
    const double m = mass(n);
    seen += m;
    const double v = term(n);
    total += v;
    if (seen >= 1.0 - 1e-12 && std::abs(v) < 1e-15 * std::abs(total)) break;
  }
  return total;
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("gpp-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ignored;
    std::filesystem::remove_all(path_, ignored);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace gpp_test
