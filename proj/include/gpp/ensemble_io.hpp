#pragma once

// Ensemble file layout (version 1)
//
//   gpp-ensemble 1\n
//   beta <double>\n
//   gamma <double>\n
//   rho <double>\n
//   n_paths <integer>\n
//   horizon <double>\n
//   sampling_period <double>\n
//   base_seed <integer>\n
//   event_cap <integer>\n
//   grid_size <integer>\n
//   encoding u32le\n
//   end_header\n
//   n_paths records, each: <u64 little-endian event total>
//                          <grid_size x u32 little-endian counts>
//
// Doubles are written with 17 significant digits, so a write/read cycle
// reproduces the spec and every count exactly. Header keys must appear in
// exactly this order; a FormatError names the first offending key.
//
// Event-times file layout (version 1, text)
//
//   gpp-events 1\n
//   one line per path: <index> <seed> <count> <t_1> ... <t_count>\n

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "gpp/simulation.hpp"

namespace gpp {

inline constexpr int kEnsembleFormatVersion = 1;

void write_ensemble(const Ensemble& ensemble, const std::filesystem::path& file);
Ensemble read_ensemble(const std::filesystem::path& file);
EnsembleSpec read_ensemble_header(const std::filesystem::path& file);

/// Appends paths in index order; used when the ensemble is too large to
/// hold in memory. The file is complete once `close` returns.
class EnsembleWriter {
 public:
  EnsembleWriter(const std::filesystem::path& file, const EnsembleSpec& spec);
  void append(std::span<const std::uint32_t> counts, std::uint64_t event_total);
  void close();
  std::size_t written() const noexcept { return written_; }

 private:
  std::ofstream out_;
  EnsembleSpec spec_;
  std::size_t grid_size_;
  std::size_t written_ = 0;
};

/// Reads paths one at a time.
class EnsembleReader {
 public:
  explicit EnsembleReader(const std::filesystem::path& file);
  const EnsembleSpec& spec() const noexcept { return spec_; }
  std::size_t grid_size() const noexcept { return grid_size_; }
  /// Fills `counts` (resized to grid_size) and returns false past the end.
  bool next(std::vector<std::uint32_t>& counts, std::uint64_t& event_total);

 private:
  std::ifstream in_;
  EnsembleSpec spec_;
  std::size_t grid_size_;
  std::size_t read_ = 0;
};

void write_event_times(std::span<const Trajectory> trajectories, const std::filesystem::path& file);
std::vector<std::vector<double>> read_event_times(const std::filesystem::path& file);

}  // namespace gpp
