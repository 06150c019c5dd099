#include <cmath>
#include <stdexcept>
#include <string>

#include "gpp/analytics.hpp"
#include "nb_core.hpp"

namespace gpp {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_time(double t) { require(std::isfinite(t) && t >= 0.0, "time must be finite and >= 0"); }

void require_ordered(double s, double t) {
  require_time(s);
  require_time(t);
  require(s <= t, "interval requires s <= t");
}

// gamma * K(s, t) for the Omori kernel.
double scaled_intensity(const ModelParams& p, double s, double t) {
  return p.hurst() * (std::log1p(p.rho() * t) - std::log1p(p.rho() * s));
}

}  // namespace

ModelParams::ModelParams(double beta, double gamma, double rho) : beta_(beta), gamma_(gamma), rho_(rho) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(beta)) throw std::invalid_argument("beta must be finite and > 0, got " + std::to_string(beta));
  if (!positive(gamma)) throw std::invalid_argument("gamma must be finite and > 0, got " + std::to_string(gamma));
  if (!positive(rho)) throw std::invalid_argument("rho must be finite and > 0, got " + std::to_string(rho));
  if (!std::isfinite(gamma / rho) || !std::isfinite(beta / gamma))
    throw std::invalid_argument("parameter ratios must be finite");
}

double event_rate(const ModelParams& p, std::uint64_t n, double t) {
  require_time(t);
  return (p.beta() + p.gamma() * static_cast<double>(n)) / (1.0 + p.rho() * t);
}

double cumulative_intensity(const ModelParams& p, double s, double t) {
  require_ordered(s, t);
  return (std::log1p(p.rho() * t) - std::log1p(p.rho() * s)) / p.rho();
}

double mean(const ModelParams& p, double t) {
  require_time(t);
  return p.shape() * std::expm1(scaled_intensity(p, 0.0, t));
}

double variance(const ModelParams& p, double t) {
  require_time(t);
  const double x = scaled_intensity(p, 0.0, t);
  return p.shape() * std::exp(x) * std::expm1(x);
}

double covariance(const ModelParams& p, double s, double t) {
  require_ordered(s, t);
  return p.shape() * std::exp(scaled_intensity(p, 0.0, t)) * std::expm1(scaled_intensity(p, 0.0, s));
}

double autocorrelation(const ModelParams& p, double s, double t) {
  require_ordered(s, t);
  require(s > 0.0, "autocorrelation is undefined at s = 0");
  const double a = std::expm1(scaled_intensity(p, 0.0, s));
  const double b = std::expm1(scaled_intensity(p, 0.0, t));
  return std::sqrt(a / (1.0 + a)) * std::sqrt((1.0 + b) / b);
}

double autocorrelation_limit(const ModelParams& p, double s) {
  require_time(s);
  require(s > 0.0, "autocorrelation limit requires s > 0");
  return std::sqrt(-std::expm1(-scaled_intensity(p, 0.0, s)));
}

double excess_kurtosis(const ModelParams& p, double t) {
  require_time(t);
  require(t > 0.0, "excess kurtosis is undefined at t = 0");
  const double x = scaled_intensity(p, 0.0, t);
  return (6.0 + std::exp(-x) / std::expm1(x)) / p.shape();
}

double log_transition_pmf(const ModelParams& p, std::uint64_t k, std::uint64_t n, double s, double t) {
  require_ordered(s, t);
  return detail::log_transition(p.shape(), k, n, scaled_intensity(p, s, t));
}

double transition_pmf(const ModelParams& p, std::uint64_t k, std::uint64_t n, double s, double t) {
  return std::exp(log_transition_pmf(p, k, n, s, t));
}

double waiting_time_survival(const ModelParams& p, std::uint64_t n, double s, double t) {
  require_ordered(s, t);
  const double a = p.beta() + p.gamma() * static_cast<double>(n);
  return std::exp(-a * cumulative_intensity(p, s, t));
}

double waiting_time_density(const ModelParams& p, std::uint64_t n, double s, double t) {
  return event_rate(p, n, t) * waiting_time_survival(p, n, s, t);
}

double waiting_time_tail_exponent(const ModelParams& p, std::uint64_t n) {
  return (p.beta() + p.gamma() * static_cast<double>(n)) / p.rho();
}

TheoreticalExponents theoretical_exponents(const ModelParams& p) {
  const double h = p.hurst();
  return TheoreticalExponents{h - 0.5, 0.5, 1.0, h};
}

}  // namespace gpp
