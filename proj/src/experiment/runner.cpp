#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>

#include <json.hpp>

#include "gpp/ensemble_io.hpp"
#include "gpp/errors.hpp"
#include "gpp/experiment.hpp"
#include "gpp/parallel.hpp"
#include "row_run.hpp"

namespace gpp {

namespace detail {

EstimationPlan row_plan(const ExperimentRow& row, const FitWindowOverrides& global, std::size_t points_per_curve) {
  EstimationPlan plan = EstimationPlan::make_default(row.horizon, row.sampling_period, row.delta, points_per_curve);
  plan.apply(global);
  plan.apply(row.fit_windows);
  return plan;
}

ExponentReport simulate_and_estimate(const ExperimentRow& row, std::uint64_t seed, const EstimationPlan& plan,
                                     unsigned threads, std::size_t memory_budget_mb,
                                     const std::optional<std::filesystem::path>& ensemble_file) {
  const EnsembleSpec spec{row.params, row.n_paths, row.horizon, row.sampling_period, seed};
  spec.validate();
  const std::size_t grid = spec.grid_size();
  const std::size_t budget = memory_budget_mb * 1024 * 1024 / sizeof(std::uint32_t);
  const std::size_t batch = std::clamp<std::size_t>(budget / grid, 1, spec.n_paths);

  ExponentPipeline pipeline(plan, spec.n_paths, spec.horizon, spec.sampling_period);
  std::optional<EnsembleWriter> writer;
  if (ensemble_file) writer.emplace(*ensemble_file, spec);

  std::vector<std::uint32_t> counts(batch * grid);
  std::vector<std::uint64_t> totals(batch);
  for (std::size_t first = 0; first < spec.n_paths; first += batch) {
    const std::size_t n = std::min(batch, spec.n_paths - first);
    parallel_for(n, threads, [&](std::size_t i) {
      const std::size_t index = first + i;
      const std::span<std::uint32_t> path(counts.data() + i * grid, grid);
      try {
        totals[i] = simulate_counts(spec.params, spec.horizon, spec.sampling_period, spec.path_seed(index), path,
                                    spec.event_cap);
      } catch (const CapacityError& e) {
        throw e.with_path_index(index);
      }
      pipeline.accumulate(index, PathView{path, spec.sampling_period});
    });
    if (writer)
      for (std::size_t i = 0; i < n; ++i)
        writer->append(std::span<const std::uint32_t>(counts.data() + i * grid, grid), totals[i]);
  }
  if (writer) writer->close();
  return pipeline.report();
}

}  // namespace detail

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error("cannot create " + file.string());
  out << text;
  if (!out) throw Error("write failed: " + file.string());
}

json window_json(const FitWindow& w) { return json{w.lo, w.hi}; }

json row_summary(const ExperimentRow& row, const ResultRow& result, const std::string& fits) {
  json j = {{"label", result.label},
            {"beta", row.params.beta()},
            {"gamma", row.params.gamma()},
            {"rho", row.params.rho()},
            {"n_paths", row.n_paths},
            {"horizon", row.horizon},
            {"delta", row.delta},
            {"sampling_period", row.sampling_period},
            {"seed", result.seed},
            {"directory", row_directory(result.label)}};
  if (result.ok()) {
    j["status"] = "ok";
    j["report"] = json::parse(fits);
  } else {
    j["status"] = "error";
    j["error"] = result.error;
  }
  return j;
}

struct RowOutcome {
  ResultRow result;
  std::string fits_json;
};

RowOutcome run_row(const ExperimentConfig& config, const ExperimentRow& row, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  RowOutcome out;
  ResultRow& r = out.result;
  r.label = row.label();
  r.gamma_over_rho = row.params.hurst();
  r.seed = row_seed(config.base_seed, r.label);
  r.n_paths = row.n_paths;
  r.horizon = row.horizon;
  r.delta = row.delta;
  try {
    const std::filesystem::path dir = config.output_dir / row_directory(r.label);
    std::filesystem::create_directories(dir);
    const EstimationPlan plan = detail::row_plan(row, config.fit_windows, config.points_per_curve);
    std::optional<std::filesystem::path> ensemble_file;
    if (config.write_ensembles) ensemble_file = dir / "ensemble.gppe";
    const ExponentReport rep =
        detail::simulate_and_estimate(row, r.seed, plan, threads, config.memory_budget_mb, ensemble_file);

    for (const ScalingCurve& curve : rep.curves) {
      const std::string stem(to_string(curve.kind));
      if (config.format == OutputFormat::Csv) write_curve_csv(curve, (dir / (stem + ".csv")).string());
      else write_text(dir / (stem + ".json"), curve_to_json(curve) + "\n");
    }
    json fits = json::parse(report_to_json(rep));
    fits["label"] = r.label;
    fits["seed"] = r.seed;
    fits["delta"] = plan.delta;
    fits["windows"] = {{"velocity", window_json(plan.velocity_window)},
                       {"etamsd", window_json(plan.etamsd_window)},
                       {"msd", window_json(plan.msd_window)}};
    out.fits_json = fits.dump(2);
    write_text(dir / "fits.json", out.fits_json + "\n");

    r.moses = rep.moses;
    r.noah = rep.noah;
    r.joseph = rep.joseph;
    r.hurst = rep.hurst;
    r.r2_abs_velocity = rep.abs_velocity_fit.r_squared;
    r.r2_sq_velocity = rep.sq_velocity_fit.r_squared;
    r.r2_etamsd = rep.etamsd_fit.r_squared;
    r.r2_msd = rep.msd_fit.r_squared;
    r.relation_residual = rep.relation_residual;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

std::string row_directory(std::string_view label) {
  std::string out = "row_";
  for (char c : label) out += c == '/' ? '_' : c == '.' ? 'p' : c;
  return out;
}

ResultsTable run_experiment(const ExperimentConfig& config, const RunCallbacks& callbacks) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);
  std::vector<RowOutcome> outcomes(config.rows.size());
  std::mutex callback_mutex;
  auto run = [&](std::size_t i, unsigned threads) {
    outcomes[i] = run_row(config, config.rows[i], threads);
    if (callbacks.row_done) {
      std::lock_guard lock(callback_mutex);
      callbacks.row_done(config.rows[i], outcomes[i].result);
    }
  };
  if (config.parallel_rows) {
    parallel_for(config.rows.size(), config.threads, [&](std::size_t i) { run(i, 1); });
  } else {
    for (std::size_t i = 0; i < config.rows.size(); ++i) run(i, config.threads);
  }

  ResultsTable table;
  json rows = json::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    rows.push_back(row_summary(config.rows[i], outcomes[i].result, outcomes[i].fits_json));
    table.rows.push_back(std::move(outcomes[i].result));
  }
  write_results(table, config.output_dir / (config.format == OutputFormat::Csv ? "results.csv" : "results.json"),
                config.format);
  json summary = {{"format", "gpp-summary"},
                  {"version", 1},
                  {"base_seed", config.base_seed},
                  {"config", json::parse(config_to_json(config))},
                  {"rows", rows}};
  write_text(config.output_dir / "summary.json", summary.dump(2) + "\n");
  return table;
}

}  // namespace gpp
