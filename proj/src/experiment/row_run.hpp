#pragma once

#include <filesystem>
#include <optional>

#include "gpp/experiment.hpp"

namespace gpp::detail {

EstimationPlan row_plan(const ExperimentRow& row, const FitWindowOverrides& global, std::size_t points_per_curve);

/// Simulates the row in batches of at most `memory_budget_mb` of grid counts
/// and streams each batch through the estimator. When `ensemble_file` is set
/// the paths are also written there in index order.
ExponentReport simulate_and_estimate(const ExperimentRow& row, std::uint64_t seed, const EstimationPlan& plan,
                                     unsigned threads, std::size_t memory_budget_mb,
                                     const std::optional<std::filesystem::path>& ensemble_file);

}  // namespace gpp::detail
