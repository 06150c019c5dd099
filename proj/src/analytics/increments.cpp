#include <cmath>
#include <stdexcept>

#include "gpp/analytics.hpp"
#include "nb_core.hpp"

namespace gpp {

namespace {

double scaled_intensity(const ModelParams& p, double s, double t) {
  return p.hurst() * (std::log1p(p.rho() * t) - std::log1p(p.rho() * s));
}

void require_interval(double s, double t) {
  if (!(std::isfinite(s) && std::isfinite(t) && s >= 0.0 && s <= t))
    throw std::invalid_argument("increment interval requires 0 <= s <= t");
}

}  // namespace

double log_increment_pmf(const ModelParams& p, std::uint64_t n, double s, double t) {
  require_interval(s, t);
  return detail::log_increment(p.shape(), n, scaled_intensity(p, s, t), scaled_intensity(p, 0.0, t));
}

double increment_pmf(const ModelParams& p, std::uint64_t n, double s, double t) {
  return std::exp(log_increment_pmf(p, n, s, t));
}

double increment_mean(const ModelParams& p, double s, double t) {
  require_interval(s, t);
  return p.shape() * std::exp(scaled_intensity(p, 0.0, s)) * std::expm1(scaled_intensity(p, s, t));
}

double increment_variance(const ModelParams& p, double s, double t) {
  const double a = increment_mean(p, s, t) / p.shape();
  return p.shape() * (a * a + a);
}

// The two increments are cells of the multinomial split of [0, t2] into
// [0,s1], (s1,t1], (t1,s2], (s2,t2]; the first and the gap cell are summed
// out. With t1 == s2 the gap cell is empty and this is the familiar
// adjacent-interval form.
JointIncrementLaw joint_increment_law(const ModelParams& p, double s1, double t1, double s2,
                                      double t2) {
  if (!(std::isfinite(s1) && std::isfinite(t2) && 0.0 <= s1 && s1 < t1 && t1 <= s2 && s2 < t2))
    throw std::invalid_argument("joint increments require 0 <= s1 < t1 <= s2 < t2");
  const double x_first = scaled_intensity(p, s1, t1);
  const double x_second = scaled_intensity(p, s2, t2);
  const double none = std::exp(-scaled_intensity(p, 0.0, t2));
  const double first = std::exp(-scaled_intensity(p, t1, t2)) * -std::expm1(-x_first);
  const double second = -std::expm1(-x_second);
  const double total = none + first + second;
  return JointIncrementLaw{p.shape(), none / total, first / total, second / total};
}

double log_joint_increment_pmf(const ModelParams& p, std::uint64_t n1, std::uint64_t n2, double s1,
                               double t1, double s2, double t2) {
  const JointIncrementLaw law = joint_increment_law(p, s1, t1, s2, t2);
  const double d1 = static_cast<double>(n1);
  const double d2 = static_cast<double>(n2);
  double out = detail::log_gamma(law.shape + d1 + d2) - detail::log_gamma(law.shape) -
               detail::log_gamma(d1 + 1.0) - detail::log_gamma(d2 + 1.0) + law.shape * std::log(law.p0);
  if (n1 > 0) out += d1 * std::log(law.p1);
  if (n2 > 0) out += d2 * std::log(law.p2);
  return out;
}

double joint_increment_pmf(const ModelParams& p, std::uint64_t n1, std::uint64_t n2, double s1,
                           double t1, double s2, double t2) {
  return std::exp(log_joint_increment_pmf(p, n1, n2, s1, t1, s2, t2));
}

double increment_covariance(const ModelParams& p, double s1, double t1, double s2, double t2) {
  const JointIncrementLaw law = joint_increment_law(p, s1, t1, s2, t2);
  return law.shape * law.p1 * law.p2 / (law.p0 * law.p0);
}

}  // namespace gpp
