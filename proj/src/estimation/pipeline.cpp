#include <stdexcept>

#include "gpp/estimation.hpp"
#include "gpp/parallel.hpp"
#include "kernels.hpp"

namespace gpp {

ExponentPipeline::ExponentPipeline(EstimationPlan plan, std::size_t n_paths, double horizon, double sampling_period)
    : plan_(std::move(plan)),
      n_paths_(n_paths),
      grid_size_(grid_length(horizon, sampling_period)),
      sampling_period_(sampling_period) {
  if (n_paths_ == 0) throw std::invalid_argument("pipeline needs at least one path");
  plan_.validate(horizon, sampling_period);
  delta_steps_ = detail::steps_of(plan_.delta, sampling_period, "delta");
  for (double t : plan_.velocity_times) velocity_steps_.push_back(detail::steps_of(t, plan_.delta, "velocity time"));
  for (double lag : plan_.etamsd_lags) lag_steps_.push_back(detail::steps_of(lag, sampling_period, "ETAMSD lag"));
  for (double t : plan_.msd_times) msd_steps_.push_back(detail::steps_of(t, sampling_period, "MSD time"));
  abs_.assign(velocity_steps_.size() * n_paths_, 0.0);
  sq_.assign(velocity_steps_.size() * n_paths_, 0.0);
  eta_.assign(lag_steps_.size() * n_paths_, 0.0);
  msd_.assign(msd_steps_.size() * n_paths_, 0.0);
  filled_.assign(n_paths_, 0);
}

void ExponentPipeline::accumulate(std::size_t path_index, PathView path) {
  if (path_index >= n_paths_) throw std::out_of_range("path index beyond the pipeline size");
  if (path.size() != grid_size_ || path.sampling_period != sampling_period_)
    throw std::invalid_argument("path does not match the pipeline grid");
  detail::path_velocities(path.counts, delta_steps_, plan_.delta, velocity_steps_, abs_.data() + path_index,
                          sq_.data() + path_index, n_paths_);
  detail::path_etamsd(path.counts, lag_steps_, eta_.data() + path_index, n_paths_);
  detail::path_msd(path.counts, msd_steps_, msd_.data() + path_index, n_paths_);
  filled_[path_index] = 1;
}

std::vector<ScalingCurve> ExponentPipeline::curves() const {
  for (unsigned char f : filled_)
    if (!f) throw std::logic_error("pipeline reduced before every path was accumulated");
  auto build = [&](Observable kind, const std::vector<double>& x, const std::vector<double>& values) {
    ScalingCurve c{kind, x, {}, {}, n_paths_};
    detail::reduce_points(values, x.size(), n_paths_, c.ordinate, c.std_error);
    return c;
  };
  std::vector<ScalingCurve> out;
  out.push_back(build(Observable::AbsVelocity, plan_.velocity_times, abs_));
  out.push_back(build(Observable::SqVelocity, plan_.velocity_times, sq_));
  out.push_back(build(Observable::Etamsd, plan_.etamsd_lags, eta_));
  out.push_back(build(Observable::Msd, plan_.msd_times, msd_));
  return out;
}

ExponentReport ExponentPipeline::report() const { return exponents_from_curves(curves(), plan_); }

ExponentReport estimate_exponents(const Ensemble& ensemble, const EstimationPlan& plan, unsigned threads) {
  const EnsembleSpec& spec = ensemble.spec();
  ExponentPipeline pipeline(plan, ensemble.size(), spec.horizon, spec.sampling_period);
  parallel_for(ensemble.size(), threads, [&](std::size_t i) { pipeline.accumulate(i, ensemble.path(i)); });
  return pipeline.report();
}

ExponentReport estimate_exponents(const Ensemble& ensemble, double delta, unsigned threads) {
  const EnsembleSpec& spec = ensemble.spec();
  return estimate_exponents(ensemble, EstimationPlan::make_default(spec.horizon, spec.sampling_period, delta), threads);
}

}  // namespace gpp
