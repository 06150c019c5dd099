#include <cmath>
#include <stdexcept>
#include <utility>

#include "gpp/analytics.hpp"
#include "nb_core.hpp"

namespace gpp {

namespace {

struct Simpson {
  const std::function<double(double)>& f;

  double whole(double a, double fa, double b, double fb, double fm) const {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  }

  double refine(double a, double fa, double b, double fb, double m, double fm, double est, double tol,
                int depth) const {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = whole(a, fa, m, fm, flm);
    const double right = whole(m, fm, b, fb, frm);
    const double diff = left + right - est;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return refine(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           refine(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
  }

  double operator()(double a, double b, double tol) const {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    return refine(a, fa, b, fb, m, fm, whole(a, fa, b, fb, fm), tol, 48);
  }
};

void require_ordered(double s, double t) {
  if (!(std::isfinite(s) && std::isfinite(t) && s >= 0.0 && s <= t))
    throw std::invalid_argument("relaxation integral requires 0 <= s <= t");
}

}  // namespace

RelaxationFunction::RelaxationFunction(std::function<double(double)> kappa,
                                       std::function<double(double, double)> cumulative,
                                       bool closed_form)
    : kappa_(std::move(kappa)), cumulative_(std::move(cumulative)), closed_form_(closed_form) {}

RelaxationFunction RelaxationFunction::omori(double rho) {
  if (!(std::isfinite(rho) && rho > 0.0)) throw std::invalid_argument("rho must be finite and > 0");
  return RelaxationFunction([rho](double t) { return 1.0 / (1.0 + rho * t); },
                            [rho](double s, double t) { return (std::log1p(rho * t) - std::log1p(rho * s)) / rho; },
                            true);
}

RelaxationFunction RelaxationFunction::from_kappa(std::function<double(double)> kappa, double abs_tolerance) {
  if (!kappa) throw std::invalid_argument("kappa must be callable");
  if (!(abs_tolerance > 0.0)) throw std::invalid_argument("quadrature tolerance must be > 0");
  auto integral = [kappa, abs_tolerance](double s, double t) {
    if (s == t) return 0.0;
    return Simpson{kappa}(s, t, abs_tolerance);
  };
  return RelaxationFunction(std::move(kappa), std::move(integral), false);
}

double RelaxationFunction::kappa(double t) const {
  const double k = kappa_(t);
  if (!(k >= 0.0)) throw std::domain_error("relaxation function returned a negative or NaN value");
  return k;
}

double RelaxationFunction::cumulative(double s, double t) const {
  require_ordered(s, t);
  return cumulative_(s, t);
}

GeneralizedPolyaProcess::GeneralizedPolyaProcess(double beta, double gamma, RelaxationFunction relaxation)
    : beta_(beta), gamma_(gamma), relaxation_(std::move(relaxation)) {
  if (!(std::isfinite(beta) && beta > 0.0)) throw std::invalid_argument("beta must be finite and > 0");
  if (!(std::isfinite(gamma) && gamma > 0.0)) throw std::invalid_argument("gamma must be finite and > 0");
}

double GeneralizedPolyaProcess::event_rate(std::uint64_t n, double t) const {
  return (beta_ + gamma_ * static_cast<double>(n)) * relaxation_.kappa(t);
}

double GeneralizedPolyaProcess::log_transition_pmf(std::uint64_t k, std::uint64_t n, double s, double t) const {
  return detail::log_transition(beta_ / gamma_, k, n, gamma_ * relaxation_.cumulative(s, t));
}

double GeneralizedPolyaProcess::transition_pmf(std::uint64_t k, std::uint64_t n, double s, double t) const {
  return std::exp(log_transition_pmf(k, n, s, t));
}

double GeneralizedPolyaProcess::mean(double t) const {
  return beta_ / gamma_ * std::expm1(gamma_ * relaxation_.cumulative(0.0, t));
}

double GeneralizedPolyaProcess::variance(double t) const {
  const double x = gamma_ * relaxation_.cumulative(0.0, t);
  return beta_ / gamma_ * std::exp(x) * std::expm1(x);
}

double GeneralizedPolyaProcess::covariance(double s, double t) const {
  require_ordered(s, t);
  return beta_ / gamma_ * std::exp(gamma_ * relaxation_.cumulative(0.0, t)) *
         std::expm1(gamma_ * relaxation_.cumulative(0.0, s));
}

double GeneralizedPolyaProcess::log_increment_pmf(std::uint64_t n, double s, double t) const {
  return detail::log_increment(beta_ / gamma_, n, gamma_ * relaxation_.cumulative(s, t),
                               gamma_ * relaxation_.cumulative(0.0, t));
}

double GeneralizedPolyaProcess::increment_pmf(std::uint64_t n, double s, double t) const {
  return std::exp(log_increment_pmf(n, s, t));
}

}  // namespace gpp
