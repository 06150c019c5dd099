#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gpp/estimation.hpp"

namespace gpp::detail {

/// Converts a grid abscissa to an integer number of `unit` steps; throws
/// std::invalid_argument naming `what` when x is not a multiple.
std::size_t steps_of(double x, double unit, const char* what);

/// Per-path values at each step count. Step lists must be ascending.
/// Velocities: abs[p] = sum |d_j| / t, sq[p] = sum d_j^2 / (t delta), where
/// d_j are increments over delta_steps grid cells and t = steps[p] * delta.
void path_velocities(std::span<const std::uint32_t> counts, std::size_t delta_steps, double delta,
                     std::span<const std::size_t> steps, double* abs_out, double* sq_out, std::size_t stride);
void path_etamsd(std::span<const std::uint32_t> counts, std::span<const std::size_t> lag_steps, double* out,
                 std::size_t stride);
void path_msd(std::span<const std::uint32_t> counts, std::span<const std::size_t> steps, double* out,
              std::size_t stride);

/// values laid out as [point * n_paths + path]; mean and sd/sqrt(n) in path
/// order.
void reduce_points(const std::vector<double>& values, std::size_t n_points, std::size_t n_paths,
                   std::vector<double>& mean, std::vector<double>& std_error);

}  // namespace gpp::detail
