#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gpp/analytics.hpp"

namespace gpp {

inline constexpr std::uint64_t kDefaultEventCap = 100'000'000;

/// Event times of one realization, right-censored at `horizon`.
struct Trajectory {
  ModelParams params;
  std::vector<double> event_times;  // strictly increasing, all <= horizon
  double horizon;
  std::uint64_t seed;

  /// State after all recorded events.
  std::uint64_t final_count() const noexcept { return event_times.size(); }
};

/// Read-only view of grid counts X(k h), k = 0 .. size-1.
struct PathView {
  std::span<const std::uint32_t> counts;
  double sampling_period;

  std::size_t size() const noexcept { return counts.size(); }
  double time_at(std::size_t k) const noexcept { return static_cast<double>(k) * sampling_period; }
};

struct SampledPath {
  std::vector<std::uint32_t> counts;
  double sampling_period;

  PathView view() const noexcept { return PathView{counts, sampling_period}; }
};

/// Number of grid points floor(T / h) + 1. A relative slack of 1e-12 keeps
/// T = m h exact when T / h rounds just below m.
std::size_t grid_length(double horizon, double sampling_period);

/// Inverts the waiting-time survival function. Deterministic in its inputs.
/// Throws std::invalid_argument unless 0 < u <= 1, s >= 0.
double sample_waiting_time(const ModelParams& params, std::uint64_t n, double s, double u);

Trajectory simulate_trajectory(const ModelParams& params, double horizon, std::uint64_t seed,
                               std::uint64_t event_cap = kDefaultEventCap);

/// counts[k] = #{events with time <= k h}, k = 0 .. floor(T/h).
SampledPath resample_to_grid(const Trajectory& trajectory, double sampling_period);

/// Simulates straight onto the grid without storing event times. Produces
/// exactly resample_to_grid(simulate_trajectory(...)) for the same seed.
/// `counts` must have grid_length(horizon, sampling_period) elements.
/// Returns the total number of events up to the horizon.
std::uint64_t simulate_counts(const ModelParams& params, double horizon, double sampling_period,
                              std::uint64_t seed, std::span<std::uint32_t> counts,
                              std::uint64_t event_cap = kDefaultEventCap);

struct EnsembleSpec {
  ModelParams params;
  std::size_t n_paths;
  double horizon;
  double sampling_period;
  std::uint64_t base_seed;
  std::uint64_t event_cap = kDefaultEventCap;

  /// Throws std::invalid_argument on h <= 0, T < h, N < 1, or a cap that
  /// does not fit the 32-bit count storage.
  void validate() const;
  std::size_t grid_size() const { return grid_length(horizon, sampling_period); }
  std::uint64_t path_seed(std::size_t index) const;

  friend bool operator==(const EnsembleSpec&, const EnsembleSpec&) = default;
};

/// N sampled paths on a shared grid, stored row-major. Immutable once built.
class Ensemble {
 public:
  Ensemble(EnsembleSpec spec, std::vector<std::uint32_t> counts, std::vector<std::uint64_t> totals);

  const EnsembleSpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return spec_.n_paths; }
  std::size_t grid_size() const noexcept { return grid_size_; }
  PathView path(std::size_t index) const;
  /// Events up to the horizon on path i (may exceed the last grid count when
  /// T is not a multiple of h).
  std::uint64_t event_total(std::size_t index) const { return totals_.at(index); }
  std::span<const std::uint32_t> raw_counts() const noexcept { return counts_; }

 private:
  EnsembleSpec spec_;
  std::size_t grid_size_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint64_t> totals_;
};

struct SimulationOptions {
  unsigned threads = 0;
};

/// Path i is simulated from stream_seed(base_seed, i). The result is
/// bit-identical for any thread count. A CapacityError carries the lowest
/// offending path index.
Ensemble simulate_ensemble(const EnsembleSpec& spec, const SimulationOptions& options = {});

}  // namespace gpp
