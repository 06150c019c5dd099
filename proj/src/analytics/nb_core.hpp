#pragma once

// Shared negative-binomial kernels. Arguments are expressed through
// x = gamma * K(s, t), so both the Omori closed form and arbitrary
// relaxation functions reuse the same code.

#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

namespace gpp::detail {

inline double log_gamma(double x) { return boost::math::lgamma(x); }

/// log(1 - exp(-x)) for x >= 0; -inf at x == 0.
inline double log1m_exp_neg(double x) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return x < 0.6931471805599453 ? std::log(-std::expm1(-x)) : std::log1p(-std::exp(-x));
}

/// log of Gamma(shape + n) / (Gamma(shape) n!) q^shape (1 - q)^n.
inline double log_nb_pmf(double shape, std::uint64_t n, double log_q, double log_1mq) {
  if (n == 0) return shape * log_q;
  if (log_1mq == -std::numeric_limits<double>::infinity())
    return -std::numeric_limits<double>::infinity();
  const double dn = static_cast<double>(n);
  return log_gamma(shape + dn) - log_gamma(shape) - log_gamma(dn + 1.0) + shape * log_q +
         dn * log_1mq;
}

/// Transition law from state k over an interval with x = gamma K(s, t).
inline double log_transition(double shape, std::uint64_t k, std::uint64_t n, double x) {
  return log_nb_pmf(shape + static_cast<double>(k), n, -x, log1m_exp_neg(x));
}

/// Increment law over (s, t] with x_st = gamma K(s, t), x_t = gamma K(0, t).
inline double log_increment(double shape, std::uint64_t n, double x_st, double x_t) {
  if (x_st <= 0.0) return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double log_den = std::log(-std::expm1(-x_st) + std::exp(-x_t));
  return log_nb_pmf(shape, n, -x_t - log_den, log1m_exp_neg(x_st) - log_den);
}

}  // namespace gpp::detail
