#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gpp/errors.hpp"
#include "gpp/estimation.hpp"
#include "kernels.hpp"

namespace gpp {

namespace {

constexpr double kMaxZeroFraction = 0.2;

FitWindow checked(FitWindow w, const char* what) {
  if (!(w.lo > 0.0) || !(w.hi >= w.lo) || !std::isfinite(w.hi))
    throw std::invalid_argument(std::string(what) + " fit window must satisfy 0 < lo <= hi");
  return w;
}

}  // namespace

bool FitWindow::contains(double x) const noexcept {
  return x >= lo * (1.0 - 1e-12) && x <= hi * (1.0 + 1e-12);
}

FitResult loglog_fit(const ScalingCurve& curve, FitWindow window) {
  const std::string name(to_string(curve.kind));
  if (!(window.lo > 0.0) || !(window.hi >= window.lo)) throw FitError(name, "window must satisfy 0 < lo <= hi");
  std::vector<double> lx, ly;
  std::size_t in_window = 0, zeros = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (!window.contains(curve.abscissa[i])) continue;
    ++in_window;
    if (!(curve.ordinate[i] > 0.0)) {
      ++zeros;
      continue;
    }
    lx.push_back(std::log(curve.abscissa[i]));
    ly.push_back(std::log(curve.ordinate[i]));
  }
  if (in_window > 0 && static_cast<double>(zeros) > kMaxZeroFraction * static_cast<double>(in_window))
    throw FitError(name, std::to_string(zeros) + " of " + std::to_string(in_window) +
                             " points in the window have a zero ordinate");
  if (lx.size() < 3)
    throw FitError(name, "only " + std::to_string(lx.size()) + " usable points in window [" +
                             std::to_string(window.lo) + ", " + std::to_string(window.hi) + "]");

  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError(name, "window holds a single abscissa");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double r2 = 1.0;
  if (syy > 1e-24 * n * std::max(1.0, my * my)) {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double r = ly[i] - (intercept + slope * lx[i]);
      ss_res += r * r;
    }
    r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return FitResult{slope, intercept, r2, window, lx.size(), zeros};
}

std::vector<double> log_spaced_multiples(double lo, double hi, double unit, std::size_t count) {
  if (!(unit > 0.0) || !(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("need 0 < lo <= hi and unit > 0");
  if (count == 0) throw std::invalid_argument("count must be positive");
  const double kmin = std::max(1.0, std::ceil(lo / unit - 1e-9));
  const double kmax = std::floor(hi / unit + 1e-9);
  std::vector<double> out;
  if (kmax < kmin) return out;
  if (count == 1) return {kmax * unit};
  const double ratio = std::log(kmax / kmin);
  double last = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    double k = std::round(kmin * std::exp(ratio * static_cast<double>(i) / static_cast<double>(count - 1)));
    k = std::clamp(k, kmin, kmax);
    if (k > last) {
      out.push_back(k * unit);
      last = k;
    }
  }
  return out;
}

EstimationPlan EstimationPlan::make_default(double horizon, double sampling_period, double delta,
                                            std::size_t points_per_curve) {
  const double h = sampling_period;
  if (!(h > 0.0) || !(horizon >= h)) throw std::invalid_argument("need 0 < h <= T");
  detail::steps_of(delta, h, "delta");
  if (!(delta > 0.0) || delta > horizon) throw std::invalid_argument("delta must lie in (0, T]");
  const double n_steps = std::floor(horizon / h * (1.0 + 1e-12));
  const double max_lag = std::min(delta, std::floor(n_steps / 2.0) * h);
  if (max_lag < h) throw std::invalid_argument("horizon too short for any ETAMSD lag");
  const double t_end = n_steps * h;

  EstimationPlan plan;
  plan.delta = delta;
  plan.velocity_times = log_spaced_multiples(delta, t_end, delta, points_per_curve);
  plan.etamsd_lags = log_spaced_multiples(h, max_lag, h, points_per_curve);
  plan.msd_times = log_spaced_multiples(h, t_end, h, points_per_curve);
  plan.velocity_window = {std::max(10.0 * h, 2.0 * delta), t_end};
  plan.etamsd_window = {std::min(10.0 * h, max_lag), max_lag};
  plan.msd_window = {std::min(10.0 * h, t_end), t_end};
  return plan;
}

void EstimationPlan::apply(const FitWindowOverrides& overrides) {
  if (overrides.velocity) velocity_window = checked(*overrides.velocity, "velocity");
  if (overrides.etamsd) etamsd_window = checked(*overrides.etamsd, "etamsd");
  if (overrides.msd) msd_window = checked(*overrides.msd, "msd");
}

void EstimationPlan::validate(double horizon, double sampling_period) const {
  const double h = sampling_period;
  const std::size_t n = grid_length(horizon, h) - 1;
  const std::size_t ds = detail::steps_of(delta, h, "delta");
  if (ds == 0) throw std::invalid_argument("delta must be positive");
  auto ascending = [](const std::vector<double>& v, const char* what) {
    if (v.empty()) throw std::invalid_argument(std::string(what) + " list is empty");
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i] > v[i - 1])) throw std::invalid_argument(std::string(what) + " must be strictly increasing");
  };
  ascending(velocity_times, "velocity time");
  ascending(etamsd_lags, "ETAMSD lag");
  ascending(msd_times, "MSD time");
  for (double t : velocity_times) {
    const std::size_t j = detail::steps_of(t, delta, "velocity time");
    if (j == 0 || j * ds > n) throw std::invalid_argument("velocity time outside [delta, T]");
  }
  for (double lag : etamsd_lags) {
    const std::size_t m = detail::steps_of(lag, h, "ETAMSD lag");
    if (m == 0 || m > n / 2) throw std::invalid_argument("ETAMSD lag outside [h, T/2]");
  }
  for (double t : msd_times)
    if (detail::steps_of(t, h, "MSD time") > n) throw std::invalid_argument("MSD time beyond the horizon");
  checked(velocity_window, "velocity");
  checked(etamsd_window, "etamsd");
  checked(msd_window, "msd");
}

bool ExponentReport::relation_flagged() const noexcept {
  return !(std::abs(relation_residual) <= kRelationTolerance);
}

ExponentReport exponents_from_curves(std::vector<ScalingCurve> curves, const EstimationPlan& plan) {
  if (curves.size() != 4) throw std::invalid_argument("expected four curves");
  const Observable order[] = {Observable::AbsVelocity, Observable::SqVelocity, Observable::Etamsd, Observable::Msd};
  for (std::size_t i = 0; i < 4; ++i)
    if (curves[i].kind != order[i]) throw std::invalid_argument("curves out of order");

  ExponentReport r{};
  r.abs_velocity_fit = loglog_fit(curves[0], plan.velocity_window);
  r.sq_velocity_fit = loglog_fit(curves[1], plan.velocity_window);
  r.etamsd_fit = loglog_fit(curves[2], plan.etamsd_window);
  r.msd_fit = loglog_fit(curves[3], plan.msd_window);
  r.moses = r.abs_velocity_fit.slope + 0.5;
  r.noah = (r.sq_velocity_fit.slope - 2.0 * r.moses + 2.0) / 2.0;
  r.joseph = r.etamsd_fit.slope / 2.0;
  r.hurst = r.msd_fit.slope / 2.0;
  r.relation_residual = r.hurst - (r.moses + r.noah + r.joseph - 1.0);
  r.curves = std::move(curves);
  return r;
}

}  // namespace gpp
