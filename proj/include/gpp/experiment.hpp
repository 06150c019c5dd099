#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpp/estimation.hpp"

namespace gpp {

/// Exact positive ratio such as "5/4" or "2", kept in lowest terms.
class Rational {
 public:
  Rational(std::int64_t num, std::int64_t den);
  /// Accepts "p/q" or an integer "p"; throws std::invalid_argument.
  static Rational parse(std::string_view text);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  /// "p/q", or "p" when q = 1.
  std::string str() const;
  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_;
  std::int64_t den_;
};

inline constexpr std::uint64_t kDefaultBaseSeed = 20240917;

enum class OutputFormat { Csv, Json };
std::string_view to_string(OutputFormat format) noexcept;
OutputFormat output_format_from_string(std::string_view name);

struct ExperimentRow {
  /// Set when the row was declared by gamma/rho; then beta = rho = 1 unless
  /// beta is given, and gamma = ratio.
  std::optional<Rational> gamma_over_rho;
  ModelParams params;
  std::size_t n_paths;
  double horizon;
  double delta;
  double sampling_period = 1.0;
  FitWindowOverrides fit_windows;

  /// Table key: the ratio text, or gamma/rho printed to 6 digits.
  std::string label() const;
};

/// Seed of a row: depends on the base seed and the row label only, so a
/// subset of rows reproduces the same numbers as the full run.
std::uint64_t row_seed(std::uint64_t base_seed, std::string_view label);

struct ExperimentConfig {
  static constexpr int kVersion = 1;

  std::string profile = "custom";
  std::vector<ExperimentRow> rows;
  std::uint64_t base_seed = kDefaultBaseSeed;
  std::filesystem::path output_dir = "gpp-output";
  FitWindowOverrides fit_windows;  // applied before per-row overrides
  OutputFormat format = OutputFormat::Csv;
  bool write_ensembles = false;
  bool parallel_rows = false;
  unsigned threads = 0;
  std::size_t memory_budget_mb = 512;
  std::size_t points_per_curve = 40;

  /// Throws std::invalid_argument naming the first bad row.
  void validate() const;
};

/// Seven rows at the full reference scale.
ExperimentConfig paper_config();
/// Same rows; 1/4 uses N/5 and T/10, 1/2 uses T/10.
ExperimentConfig desk_scale_config();
/// "paper" or "desk-scale"; throws std::invalid_argument otherwise.
ExperimentConfig profile_config(std::string_view name);
/// Keeps rows whose label matches one of `labels`, in the order given (parsed
/// as rationals, so "2/1" selects "2"). Throws std::invalid_argument on an unknown label.
ExperimentConfig select_rows(const ExperimentConfig& config, const std::vector<std::string>& labels);

std::string config_to_json(const ExperimentConfig& config);
/// Throws FormatError naming the offending key.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& file);
void save_config(const ExperimentConfig& config, const std::filesystem::path& file);

struct ResultRow {
  std::string label;
  double gamma_over_rho;
  double moses = 0.0;
  double noah = 0.0;
  double joseph = 0.0;
  double hurst = 0.0;
  double r2_abs_velocity = 0.0;
  double r2_sq_velocity = 0.0;
  double r2_etamsd = 0.0;
  double r2_msd = 0.0;
  double relation_residual = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_paths = 0;
  double horizon = 0.0;
  double delta = 0.0;
  std::string error;  // empty when the row succeeded
  double wall_time_s = 0.0;

  bool ok() const noexcept { return error.empty(); }
};

struct ResultsTable {
  std::vector<ResultRow> rows;
  const ResultRow* find(std::string_view label) const;
};

/// "# gpp-results v1" header, one line per row; failed rows carry
/// "error: <message>" in the status column and NA exponents. The wall-time
/// column is last and can be left out for byte comparisons.
std::string results_to_csv(const ResultsTable& table, bool include_wall_time = true);
std::string results_to_json(const ResultsTable& table, bool include_wall_time = true);
ResultsTable results_from_csv(const std::string& text);
void write_results(const ResultsTable& table, const std::filesystem::path& file, OutputFormat format);

/// Reference exponents for the seven rows.
ResultsTable reference_table();

struct ExponentTolerance {
  double moses;
  double noah;
  double joseph;
  double hurst;
};

struct Tolerances {
  ExponentTolerance defaults{0.07, 0.05, 0.05, 0.05};
  std::map<std::string, ExponentTolerance> per_row;

  const ExponentTolerance& for_row(const std::string& label) const;
};

/// Defaults plus the relaxed slow-convergence rows 1/4 and 1/2.
Tolerances reference_tolerances();

struct CellCheck {
  std::string label;
  std::string exponent;
  double value;
  double reference;
  double difference;
  double tolerance;
  bool pass;
};

struct ComparisonReport {
  std::vector<CellCheck> cells;
  std::vector<std::string> failed_rows;  // rows that carry an error marker
  bool pass = true;
};

/// Compares every table row with the reference row of the same label.
/// Throws std::invalid_argument when a label is missing from the reference.
ComparisonReport compare_to_reference(const ResultsTable& table, const ResultsTable& reference,
                                      const Tolerances& tolerances);
std::string comparison_to_text(const ComparisonReport& report);

struct RunCallbacks {
  std::function<void(const ExperimentRow&, const ResultRow&)> row_done;
};

/// Per row: simulate in memory-bounded batches, stream paths through the
/// estimator, write the four curves, fits.json and optionally the ensemble
/// under output_dir/<row directory>/. Writes results.csv (or .json) and
/// summary.json at the top. A failing row is marked and the rest still run.
ResultsTable run_experiment(const ExperimentConfig& config, const RunCallbacks& callbacks = {});

/// "3/4" -> "row_3_4".
std::string row_directory(std::string_view label);

enum class FigureKind { Autocorrelation, RegimeDiagram, IncrementPmf, ScalingCurves };
std::string_view to_string(FigureKind kind) noexcept;
/// Accepts the names above (snake_case) or the figure numbers "1".."4".
FigureKind figure_kind_from_string(std::string_view name);

struct FigureOptions {
  OutputFormat format = OutputFormat::Csv;
  std::uint64_t seed = kDefaultBaseSeed;
  unsigned threads = 0;
  /// Scaling curves only; defaults to the 3/4 reference row.
  std::optional<ExperimentRow> row;
};

/// Writes plot-ready data into out_dir and returns the files written.
/// Figures 1-3 come from the closed forms; figure 4 runs one simulation.
std::vector<std::filesystem::path> emit_figure_data(FigureKind kind, const std::filesystem::path& out_dir,
                                                    const FigureOptions& options = {});

}  // namespace gpp
