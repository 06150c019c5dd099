#include <cmath>
#include <limits>
#include <stdexcept>

#include "gpp/errors.hpp"
#include "gpp/rng.hpp"
#include "gpp/simulation.hpp"

namespace gpp {

namespace {

// t = s + (1 + rho s) (u^(-rho / a) - 1) / rho, a = beta + gamma n.
inline double next_event_time(const ModelParams& p, std::uint64_t n, double s, double u) {
  const double a = p.beta() + p.gamma() * static_cast<double>(n);
  return s + (1.0 + p.rho() * s) * std::expm1(-p.rho() * std::log(u) / a) / p.rho();
}

// Calls on_event(t) for each event time in (0, horizon], in order.
template <typename OnEvent>
std::uint64_t run_events(const ModelParams& p, double horizon, std::uint64_t seed, std::uint64_t cap,
                         OnEvent&& on_event) {
  RandomStream rng(seed);
  double s = 0.0;
  std::uint64_t n = 0;
  for (;;) {
    double t = next_event_time(p, n, s, rng.uniform_open_closed());
    if (!(t <= horizon)) break;
    // Keeps event times strictly increasing when the wait rounds to zero.
    if (t <= s) t = std::nextafter(s, std::numeric_limits<double>::infinity());
    if (t > horizon) break;
    if (n == cap) throw CapacityError(cap, 0, false);
    ++n;
    on_event(t);
    s = t;
  }
  return n;
}

void require_horizon(double horizon) {
  if (!(std::isfinite(horizon) && horizon > 0.0)) throw std::invalid_argument("horizon must be finite and > 0");
}

}  // namespace

std::size_t grid_length(double horizon, double sampling_period) {
  if (!(std::isfinite(sampling_period) && sampling_period > 0.0))
    throw std::invalid_argument("sampling period must be finite and > 0");
  require_horizon(horizon);
  const double steps = std::floor(horizon / sampling_period * (1.0 + 1e-12));
  if (steps > 1e12) throw std::invalid_argument("grid too large");
  return static_cast<std::size_t>(steps) + 1;
}

double sample_waiting_time(const ModelParams& params, std::uint64_t n, double s, double u) {
  if (!(u > 0.0 && u <= 1.0)) throw std::invalid_argument("uniform variate must lie in (0, 1]");
  if (!(std::isfinite(s) && s >= 0.0)) throw std::invalid_argument("current time must be finite and >= 0");
  return next_event_time(params, n, s, u);
}

Trajectory simulate_trajectory(const ModelParams& params, double horizon, std::uint64_t seed,
                               std::uint64_t event_cap) {
  require_horizon(horizon);
  Trajectory out{params, {}, horizon, seed};
  run_events(params, horizon, seed, event_cap, [&](double t) { out.event_times.push_back(t); });
  return out;
}

SampledPath resample_to_grid(const Trajectory& trajectory, double sampling_period) {
  if (!(sampling_period > 0.0 && sampling_period <= trajectory.horizon))
    throw std::invalid_argument("sampling period must satisfy 0 < h <= horizon");
  SampledPath out{std::vector<std::uint32_t>(grid_length(trajectory.horizon, sampling_period), 0),
                  sampling_period};
  std::size_t k = 0;
  std::uint32_t seen = 0;
  for (double t : trajectory.event_times) {
    while (k < out.counts.size() && static_cast<double>(k) * sampling_period < t) out.counts[k++] = seen;
    ++seen;
  }
  while (k < out.counts.size()) out.counts[k++] = seen;
  return out;
}

std::uint64_t simulate_counts(const ModelParams& params, double horizon, double sampling_period,
                              std::uint64_t seed, std::span<std::uint32_t> counts, std::uint64_t event_cap) {
  require_horizon(horizon);
  if (counts.size() != grid_length(horizon, sampling_period))
    throw std::invalid_argument("count buffer does not match the grid length");
  std::size_t k = 0;
  std::uint32_t seen = 0;
  const std::uint64_t total = run_events(params, horizon, seed, event_cap, [&](double t) {
    while (k < counts.size() && static_cast<double>(k) * sampling_period < t) counts[k++] = seen;
    ++seen;
  });
  while (k < counts.size()) counts[k++] = seen;
  return total;
}

}  // namespace gpp
