#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpp/simulation.hpp"

namespace gpp {

enum class Observable { AbsVelocity, SqVelocity, Etamsd, Msd, VelocityAutocorrelation };

std::string_view to_string(Observable kind) noexcept;
/// Inverse of to_string; throws std::invalid_argument on an unknown name.
Observable observable_from_string(std::string_view name);

/// Ensemble-averaged observable sampled at increasing abscissae.
struct ScalingCurve {
  Observable kind;
  std::vector<double> abscissa;
  std::vector<double> ordinate;
  std::vector<double> std_error;  // sample sd / sqrt(n_paths)
  std::size_t n_paths = 0;

  std::size_t size() const noexcept { return abscissa.size(); }
  /// Equal lengths, strictly increasing abscissa, finite values. Throws
  /// std::invalid_argument.
  void validate() const;
};

/// Closed interval on the abscissa.
struct FitWindow {
  double lo;
  double hi;

  bool contains(double x) const noexcept;
  friend bool operator==(const FitWindow&, const FitWindow&) = default;
};

struct FitResult {
  double slope;
  double intercept;
  double r_squared;
  FitWindow window;
  std::size_t n_points;         // points used in the regression
  std::size_t n_zero_excluded;  // in-window points dropped for a nonpositive ordinate
};

/// OLS of ln(ordinate) on ln(abscissa) over the window. Nonpositive ordinates
/// are dropped; FitError if more than 20% of the in-window points are dropped
/// or fewer than 3 remain. A perfectly flat curve has R^2 = 1.
FitResult loglog_fit(const ScalingCurve& curve, FitWindow window);

/// Per-path time averages, then ensemble mean. Every t must be a positive
/// multiple of delta and lie on the grid; delta must be a multiple of h.
ScalingCurve abs_velocity_average(const Ensemble& ensemble, double delta, const std::vector<double>& eval_times,
                                  unsigned threads = 0);
ScalingCurve sq_velocity_average(const Ensemble& ensemble, double delta, const std::vector<double>& eval_times,
                                 unsigned threads = 0);
/// Sliding-window mean of (X(kh + lag) - X(kh))^2; each lag is m h with
/// 1 <= m <= (grid_size - 1) / 2.
ScalingCurve etamsd(const Ensemble& ensemble, const std::vector<double>& lags, unsigned threads = 0);
ScalingCurve msd(const Ensemble& ensemble, const std::vector<double>& eval_times, unsigned threads = 0);

/// <d(t-1,t) d(t-1+lag,t+lag)> / <d(t-1,t)^2> with unit-length increments.
/// Lag 0 gives 1. Requires t >= 1 and t + max lag <= T, all on the grid.
ScalingCurve velocity_autocorrelation(const Ensemble& ensemble, double t, const std::vector<double>& lags,
                                      unsigned threads = 0);

/// Model expectations of the averaged observables.
double expected_abs_velocity(const ModelParams& params, double delta, double t);
double expected_sq_velocity(const ModelParams& params, double delta, double t);
double expected_msd(const ModelParams& params, double t);

/// `count` roughly log-spaced multiples of `unit` covering [lo, hi], rounded
/// and de-duplicated. Both ends are included when they are multiples.
std::vector<double> log_spaced_multiples(double lo, double hi, double unit, std::size_t count);

struct FitWindowOverrides {
  std::optional<FitWindow> velocity;
  std::optional<FitWindow> etamsd;
  std::optional<FitWindow> msd;
};

/// Where each curve is evaluated and which part of it is fitted.
struct EstimationPlan {
  double delta;
  std::vector<double> velocity_times;
  std::vector<double> etamsd_lags;
  std::vector<double> msd_times;
  FitWindow velocity_window;
  FitWindow etamsd_window;
  FitWindow msd_window;

  /// Velocities at multiples of delta in [delta, T], fitted on
  /// [max(10h, 2 delta), T]; ETAMSD lags in [h, delta], fitted on [10h, delta];
  /// MSD at [h, T], fitted on [10h, T].
  static EstimationPlan make_default(double horizon, double sampling_period, double delta,
                                     std::size_t points_per_curve = 40);
  void apply(const FitWindowOverrides& overrides);
  /// Checks every point against the grid of (horizon, h). Throws
  /// std::invalid_argument.
  void validate(double horizon, double sampling_period) const;
};

struct ExponentReport {
  double moses;
  double noah;
  double joseph;
  double hurst;
  FitResult abs_velocity_fit;
  FitResult sq_velocity_fit;
  FitResult etamsd_fit;
  FitResult msd_fit;
  std::vector<ScalingCurve> curves;  // abs velocity, sq velocity, ETAMSD, MSD
  double relation_residual;          // H - (M + L + J - 1)

  static constexpr double kRelationTolerance = 0.1;
  bool relation_flagged() const noexcept;
};

/// Maps the four fitted curves to exponents. Throws FitError naming the
/// observable whose fit failed.
ExponentReport exponents_from_curves(std::vector<ScalingCurve> curves, const EstimationPlan& plan);

/// Accumulates all four observables path by path without keeping the paths.
/// accumulate() may run concurrently for distinct indices; the reduction is
/// in index order, so results do not depend on batching or thread count.
class ExponentPipeline {
 public:
  ExponentPipeline(EstimationPlan plan, std::size_t n_paths, double horizon, double sampling_period);

  void accumulate(std::size_t path_index, PathView path);
  std::size_t n_paths() const noexcept { return n_paths_; }
  const EstimationPlan& plan() const noexcept { return plan_; }
  std::vector<ScalingCurve> curves() const;
  ExponentReport report() const;

 private:
  EstimationPlan plan_;
  std::size_t n_paths_;
  std::size_t grid_size_;
  double sampling_period_;
  std::vector<std::size_t> velocity_steps_;  // t / delta
  std::size_t delta_steps_;                  // delta / h
  std::vector<std::size_t> lag_steps_;
  std::vector<std::size_t> msd_steps_;
  // [observable][point * n_paths + path]
  std::vector<double> abs_, sq_, eta_, msd_;
  std::vector<unsigned char> filled_;
};

ExponentReport estimate_exponents(const Ensemble& ensemble, const EstimationPlan& plan, unsigned threads = 0);
ExponentReport estimate_exponents(const Ensemble& ensemble, double delta, unsigned threads = 0);

/// Curve file: "# gpp-curve v1", "# observable <name>", "# n_paths <N>",
/// then the column header "abscissa,ordinate,n_paths,std_error" and rows.
void write_curve_csv(const ScalingCurve& curve, const std::string& path);
ScalingCurve read_curve_csv(const std::string& path);
std::string curve_to_json(const ScalingCurve& curve);
ScalingCurve curve_from_json(const std::string& text);
/// Exponents, fits, windows and the residual flag as one JSON object.
std::string report_to_json(const ExponentReport& report, int indent = 2);

}  // namespace gpp
