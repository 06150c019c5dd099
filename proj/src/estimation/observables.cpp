#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gpp/analytics.hpp"
#include "gpp/estimation.hpp"
#include "gpp/parallel.hpp"
#include "kernels.hpp"

namespace gpp {

namespace detail {

std::size_t steps_of(double x, double unit, const char* what) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
  const double m = std::round(x / unit);
  if (std::abs(m * unit - x) > 1e-9 * std::max(x, unit))
    throw std::invalid_argument(std::string(what) + " " + std::to_string(x) + " is not a multiple of " +
                                std::to_string(unit));
  return static_cast<std::size_t>(m);
}

void path_velocities(std::span<const std::uint32_t> counts, std::size_t delta_steps, double delta,
                     std::span<const std::size_t> steps, double* abs_out, double* sq_out, std::size_t stride) {
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  std::size_t p = 0;
  for (std::size_t j = 1; p < steps.size(); ++j) {
    const double d = static_cast<double>(counts[j * delta_steps]) - static_cast<double>(counts[(j - 1) * delta_steps]);
    abs_sum += std::abs(d);
    sq_sum += d * d;
    while (p < steps.size() && steps[p] == j) {
      const double t = static_cast<double>(j) * delta;
      abs_out[p * stride] = abs_sum / t;
      sq_out[p * stride] = sq_sum / (t * delta);
      ++p;
    }
  }
}

void path_etamsd(std::span<const std::uint32_t> counts, std::span<const std::size_t> lag_steps, double* out,
                 std::size_t stride) {
  const std::size_t n = counts.size() - 1;
  for (std::size_t p = 0; p < lag_steps.size(); ++p) {
    const std::size_t m = lag_steps[p];
    double sum = 0.0;
    for (std::size_t k = 0; k + m <= n; ++k) {
      const double d = static_cast<double>(counts[k + m] - counts[k]);
      sum += d * d;
    }
    out[p * stride] = sum / static_cast<double>(n - m + 1);
  }
}

void path_msd(std::span<const std::uint32_t> counts, std::span<const std::size_t> steps, double* out,
              std::size_t stride) {
  for (std::size_t p = 0; p < steps.size(); ++p) {
    const double x = counts[steps[p]];
    out[p * stride] = x * x;
  }
}

void reduce_points(const std::vector<double>& values, std::size_t n_points, std::size_t n_paths,
                   std::vector<double>& mean, std::vector<double>& std_error) {
  mean.assign(n_points, 0.0);
  std_error.assign(n_points, 0.0);
  const double n = static_cast<double>(n_paths);
  for (std::size_t p = 0; p < n_points; ++p) {
    const double* row = values.data() + p * n_paths;
    double sum = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) sum += row[i];
    const double m = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) ss += (row[i] - m) * (row[i] - m);
    mean[p] = m;
    std_error[p] = n_paths > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  }
}

}  // namespace detail

namespace {

void check_ascending(const std::vector<std::size_t>& steps, const char* what) {
  if (steps.empty()) throw std::invalid_argument(std::string(what) + " list is empty");
  for (std::size_t i = 1; i < steps.size(); ++i)
    if (steps[i] <= steps[i - 1]) throw std::invalid_argument(std::string(what) + " must be strictly increasing");
}

ScalingCurve build_curve(Observable kind, std::vector<double> abscissa, const std::vector<double>& values,
                         std::size_t n_paths) {
  ScalingCurve curve{kind, std::move(abscissa), {}, {}, n_paths};
  detail::reduce_points(values, curve.abscissa.size(), n_paths, curve.ordinate, curve.std_error);
  return curve;
}

struct VelocityGrid {
  std::size_t delta_steps;
  std::vector<std::size_t> steps;  // t / delta
};

VelocityGrid velocity_grid(const Ensemble& ensemble, double delta, const std::vector<double>& eval_times) {
  const double h = ensemble.spec().sampling_period;
  VelocityGrid g{detail::steps_of(delta, h, "delta"), {}};
  if (g.delta_steps == 0) throw std::invalid_argument("delta must be positive");
  for (double t : eval_times) {
    if (!(t >= delta)) throw std::invalid_argument("evaluation time below delta");
    g.steps.push_back(detail::steps_of(t, delta, "evaluation time"));
  }
  check_ascending(g.steps, "evaluation time");
  if (g.steps.back() * g.delta_steps >= ensemble.grid_size())
    throw std::invalid_argument("evaluation time beyond the horizon");
  return g;
}

std::vector<ScalingCurve> velocity_curves(const Ensemble& ensemble, double delta,
                                          const std::vector<double>& eval_times, unsigned threads) {
  const VelocityGrid g = velocity_grid(ensemble, delta, eval_times);
  const std::size_t n = ensemble.size();
  std::vector<double> abs_v(g.steps.size() * n), sq_v(g.steps.size() * n);
  parallel_for(n, threads, [&](std::size_t i) {
    detail::path_velocities(ensemble.path(i).counts, g.delta_steps, delta, g.steps, abs_v.data() + i, sq_v.data() + i,
                            n);
  });
  std::vector<ScalingCurve> out;
  out.push_back(build_curve(Observable::AbsVelocity, eval_times, abs_v, n));
  out.push_back(build_curve(Observable::SqVelocity, eval_times, sq_v, n));
  return out;
}

}  // namespace

std::string_view to_string(Observable kind) noexcept {
  switch (kind) {
    case Observable::AbsVelocity: return "abs_velocity";
    case Observable::SqVelocity: return "sq_velocity";
    case Observable::Etamsd: return "etamsd";
    case Observable::Msd: return "msd";
    case Observable::VelocityAutocorrelation: return "velocity_autocorrelation";
  }
  return "unknown";
}

Observable observable_from_string(std::string_view name) {
  for (Observable k : {Observable::AbsVelocity, Observable::SqVelocity, Observable::Etamsd, Observable::Msd,
                       Observable::VelocityAutocorrelation})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown observable '" + std::string(name) + "'");
}

void ScalingCurve::validate() const {
  if (ordinate.size() != abscissa.size() || std_error.size() != abscissa.size())
    throw std::invalid_argument("curve columns differ in length");
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    if (!std::isfinite(abscissa[i]) || !std::isfinite(ordinate[i]) || !std::isfinite(std_error[i]))
      throw std::invalid_argument("curve contains a non-finite value");
    if (i > 0 && !(abscissa[i] > abscissa[i - 1])) throw std::invalid_argument("curve abscissa not increasing");
  }
}

ScalingCurve abs_velocity_average(const Ensemble& ensemble, double delta, const std::vector<double>& eval_times,
                                  unsigned threads) {
  return velocity_curves(ensemble, delta, eval_times, threads)[0];
}

ScalingCurve sq_velocity_average(const Ensemble& ensemble, double delta, const std::vector<double>& eval_times,
                                 unsigned threads) {
  return velocity_curves(ensemble, delta, eval_times, threads)[1];
}

ScalingCurve etamsd(const Ensemble& ensemble, const std::vector<double>& lags, unsigned threads) {
  const double h = ensemble.spec().sampling_period;
  std::vector<std::size_t> steps;
  for (double lag : lags) steps.push_back(detail::steps_of(lag, h, "lag"));
  check_ascending(steps, "lag");
  if (steps.front() == 0) throw std::invalid_argument("lag must be positive");
  if (steps.back() > (ensemble.grid_size() - 1) / 2) throw std::invalid_argument("lag exceeds half the horizon");
  const std::size_t n = ensemble.size();
  std::vector<double> values(steps.size() * n);
  parallel_for(n, threads, [&](std::size_t i) { detail::path_etamsd(ensemble.path(i).counts, steps, values.data() + i, n); });
  return build_curve(Observable::Etamsd, lags, values, n);
}

ScalingCurve msd(const Ensemble& ensemble, const std::vector<double>& eval_times, unsigned threads) {
  const double h = ensemble.spec().sampling_period;
  std::vector<std::size_t> steps;
  for (double t : eval_times) steps.push_back(detail::steps_of(t, h, "evaluation time"));
  check_ascending(steps, "evaluation time");
  if (steps.back() >= ensemble.grid_size()) throw std::invalid_argument("evaluation time beyond the horizon");
  const std::size_t n = ensemble.size();
  std::vector<double> values(steps.size() * n);
  parallel_for(n, threads, [&](std::size_t i) { detail::path_msd(ensemble.path(i).counts, steps, values.data() + i, n); });
  return build_curve(Observable::Msd, eval_times, values, n);
}

ScalingCurve velocity_autocorrelation(const Ensemble& ensemble, double t, const std::vector<double>& lags,
                                      unsigned threads) {
  if (!(t >= 1.0)) throw std::invalid_argument("velocity autocorrelation needs t >= 1");
  const double h = ensemble.spec().sampling_period;
  const std::size_t unit = detail::steps_of(1.0, h, "unit increment");
  const std::size_t end = detail::steps_of(t, h, "t");
  std::vector<std::size_t> shifts;
  for (double lag : lags) shifts.push_back(detail::steps_of(lag, h, "lag"));
  if (shifts.empty()) throw std::invalid_argument("lag list is empty");
  for (std::size_t i = 1; i < shifts.size(); ++i)
    if (shifts[i] <= shifts[i - 1]) throw std::invalid_argument("lag must be strictly increasing");
  if (end + shifts.back() >= ensemble.grid_size()) throw std::invalid_argument("t + lag beyond the horizon");

  const std::size_t n = ensemble.size();
  const std::size_t np = shifts.size();
  std::vector<double> products(np * n), base(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto c = ensemble.path(i).counts;
    const double d0 = static_cast<double>(c[end] - c[end - unit]);
    base[i] = d0 * d0;
    for (std::size_t p = 0; p < np; ++p) {
      const double d = static_cast<double>(c[end + shifts[p]] - c[end + shifts[p] - unit]);
      products[p * n + i] = d0 * d;
    }
  });
  std::vector<double> base_mean, base_se;
  detail::reduce_points(base, 1, n, base_mean, base_se);
  ScalingCurve curve = build_curve(Observable::VelocityAutocorrelation, lags, products, n);
  const double denom = base_mean[0];
  for (std::size_t p = 0; p < np; ++p) {
    curve.ordinate[p] = denom > 0.0 ? curve.ordinate[p] / denom : 0.0;
    curve.std_error[p] = denom > 0.0 ? curve.std_error[p] / denom : 0.0;
  }
  return curve;
}

double expected_abs_velocity(const ModelParams& params, double delta, double t) {
  const std::size_t m = detail::steps_of(t, delta, "t");
  if (m == 0) throw std::invalid_argument("t must be >= delta");
  double sum = 0.0;
  for (std::size_t j = 1; j <= m; ++j) sum += increment_mean(params, (j - 1) * delta, j * delta);
  return sum / t;
}

double expected_sq_velocity(const ModelParams& params, double delta, double t) {
  const std::size_t m = detail::steps_of(t, delta, "t");
  if (m == 0) throw std::invalid_argument("t must be >= delta");
  double sum = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    const double s0 = (j - 1) * delta, s1 = j * delta;
    const double mu = increment_mean(params, s0, s1);
    sum += increment_variance(params, s0, s1) + mu * mu;
  }
  return sum / (t * delta);
}

double expected_msd(const ModelParams& params, double t) {
  const double mu = mean(params, t);
  return variance(params, t) + mu * mu;
}

}  // namespace gpp
