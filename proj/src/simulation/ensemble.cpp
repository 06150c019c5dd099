#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "gpp/errors.hpp"
#include "gpp/parallel.hpp"
#include "gpp/rng.hpp"
#include "gpp/simulation.hpp"

namespace gpp {

void EnsembleSpec::validate() const {
  if (!(std::isfinite(sampling_period) && sampling_period > 0.0))
    throw std::invalid_argument("sampling period must be finite and > 0");
  if (!(std::isfinite(horizon) && horizon >= sampling_period))
    throw std::invalid_argument("horizon must be finite and >= sampling period");
  if (n_paths < 1) throw std::invalid_argument("an ensemble needs at least one path");
  if (event_cap < 1 || event_cap > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("event cap must lie in [1, 2^32 - 1]");
}

std::uint64_t EnsembleSpec::path_seed(std::size_t index) const { return stream_seed(base_seed, index); }

Ensemble::Ensemble(EnsembleSpec spec, std::vector<std::uint32_t> counts, std::vector<std::uint64_t> totals)
    : spec_(std::move(spec)), grid_size_(spec_.grid_size()), counts_(std::move(counts)), totals_(std::move(totals)) {
  spec_.validate();
  if (counts_.size() != grid_size_ * spec_.n_paths)
    throw std::invalid_argument("count storage does not match n_paths x grid size");
  if (totals_.size() != spec_.n_paths) throw std::invalid_argument("one event total per path is required");
}

PathView Ensemble::path(std::size_t index) const {
  if (index >= spec_.n_paths) throw std::out_of_range("path index out of range");
  return PathView{std::span<const std::uint32_t>(counts_).subspan(index * grid_size_, grid_size_),
                  spec_.sampling_period};
}

Ensemble simulate_ensemble(const EnsembleSpec& spec, const SimulationOptions& options) {
  spec.validate();
  const std::size_t len = spec.grid_size();
  std::vector<std::uint32_t> counts(len * spec.n_paths);
  std::vector<std::uint64_t> totals(spec.n_paths);
  parallel_for(spec.n_paths, options.threads, [&](std::size_t i) {
    try {
      totals[i] = simulate_counts(spec.params, spec.horizon, spec.sampling_period, spec.path_seed(i),
                                  std::span<std::uint32_t>(counts).subspan(i * len, len), spec.event_cap);
    } catch (const CapacityError& e) {
      throw e.with_path_index(i);
    }
  });
  return Ensemble(spec, std::move(counts), std::move(totals));
}

}  // namespace gpp
