#pragma once

// Closed-form law of the three-parameter BPM counting process, whose event
// rate is (beta + gamma * n) / (1 + rho * t). Every function here is pure.

#include <cstdint>
#include <functional>
#include <string_view>

namespace gpp {

/// The (beta, gamma, rho) triple. All three must be finite and > 0.
class ModelParams {
 public:
  ModelParams(double beta, double gamma, double rho);

  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }
  double rho() const noexcept { return rho_; }

  /// gamma / rho; equals the Hurst exponent of the process.
  double hurst() const noexcept { return gamma_ / rho_; }
  /// beta / gamma; the negative-binomial shape of every marginal law.
  double shape() const noexcept { return beta_ / gamma_; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  double beta_;
  double gamma_;
  double rho_;
};

/// Time-damping function kappa(t) and its integral K(s, t).
///
/// The Omori instance kappa(t) = 1 / (1 + rho t) is evaluated in closed form.
/// Any other nonnegative integrable kappa can be supplied; K is then obtained
/// by adaptive Simpson quadrature to an absolute tolerance (default 1e-10).
class RelaxationFunction {
 public:
  static RelaxationFunction omori(double rho);
  static RelaxationFunction from_kappa(std::function<double(double)> kappa,
                                       double abs_tolerance = 1e-10);

  double kappa(double t) const;
  /// K(s, t); requires 0 <= s <= t.
  double cumulative(double s, double t) const;
  bool closed_form() const noexcept { return closed_form_; }

 private:
  RelaxationFunction(std::function<double(double)> kappa,
                     std::function<double(double, double)> cumulative,
                     bool closed_form);

  std::function<double(double)> kappa_;
  std::function<double(double, double)> cumulative_;
  bool closed_form_;
};

/// Generalized Polya process with rate (beta + gamma n) kappa(t) for an
/// arbitrary relaxation function. The 3p-BPM free functions below are the
/// Omori special case and agree with this class to rounding.
class GeneralizedPolyaProcess {
 public:
  GeneralizedPolyaProcess(double beta, double gamma, RelaxationFunction relaxation);

  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }
  const RelaxationFunction& relaxation() const noexcept { return relaxation_; }

  double event_rate(std::uint64_t n, double t) const;
  double log_transition_pmf(std::uint64_t k, std::uint64_t n, double s, double t) const;
  double transition_pmf(std::uint64_t k, std::uint64_t n, double s, double t) const;
  double mean(double t) const;
  double variance(double t) const;
  double covariance(double s, double t) const;
  double log_increment_pmf(std::uint64_t n, double s, double t) const;
  double increment_pmf(std::uint64_t n, double s, double t) const;

 private:
  double beta_;
  double gamma_;
  RelaxationFunction relaxation_;
};

enum class Regime { Subdiffusion, BrownianNonGaussian, Superdiffusion, Ballistic, Hyperballistic };

std::string_view to_string(Regime regime) noexcept;

struct TheoreticalExponents {
  double moses;
  double noah;
  double joseph;
  double hurst;
};

/// Parameters of the negative multinomial law of two disjoint increments
/// delta(s1, t1) and delta(s2, t2): P(n1, n2) ∝ p0^shape p1^n1 p2^n2.
struct JointIncrementLaw {
  double shape;
  double p0;
  double p1;
  double p2;
};

// --- rate and integrated rate --------------------------------------------

double event_rate(const ModelParams& params, std::uint64_t n, double t);
/// K(s, t) = ln((1 + rho t) / (1 + rho s)) / rho. Throws if s > t or s < 0.
double cumulative_intensity(const ModelParams& params, double s, double t);

// --- one-time and two-time moments of X(t), started at X(0) = 0 ----------

double mean(const ModelParams& params, double t);
double variance(const ModelParams& params, double t);
/// Cov[X(s), X(t)] for s <= t.
double covariance(const ModelParams& params, double s, double t);
/// Cov / sqrt(Var Var), 0 < s <= t.
double autocorrelation(const ModelParams& params, double s, double t);
/// Limit of autocorrelation(s, t) as t -> infinity.
double autocorrelation_limit(const ModelParams& params, double s);
double excess_kurtosis(const ModelParams& params, double t);

// --- probability mass functions (log forms never underflow) -------------

/// P[X(t) = k + n | X(s) = k].
double log_transition_pmf(const ModelParams& params, std::uint64_t k, std::uint64_t n,
                          double s, double t);
double transition_pmf(const ModelParams& params, std::uint64_t k, std::uint64_t n,
                      double s, double t);

/// P[X(t) - X(s) = n] for the process started at X(0) = 0.
double log_increment_pmf(const ModelParams& params, std::uint64_t n, double s, double t);
double increment_pmf(const ModelParams& params, std::uint64_t n, double s, double t);
double increment_mean(const ModelParams& params, double s, double t);
double increment_variance(const ModelParams& params, double s, double t);

/// Requires 0 <= s1 < t1 <= s2 < t2.
JointIncrementLaw joint_increment_law(const ModelParams& params, double s1, double t1,
                                      double s2, double t2);
double log_joint_increment_pmf(const ModelParams& params, std::uint64_t n1, std::uint64_t n2,
                               double s1, double t1, double s2, double t2);
double joint_increment_pmf(const ModelParams& params, std::uint64_t n1, std::uint64_t n2,
                           double s1, double t1, double s2, double t2);
/// Cov[delta(s1,t1), delta(s2,t2)] = shape p1 p2 / p0^2.
double increment_covariance(const ModelParams& params, double s1, double t1, double s2,
                            double t2);

// --- waiting times --------------------------------------------------------

/// Density of the next event time t given state n at time s.
double waiting_time_density(const ModelParams& params, std::uint64_t n, double s, double t);
/// P[next event after t | state n at time s].
double waiting_time_survival(const ModelParams& params, std::uint64_t n, double s, double t);
/// alpha_n = (beta + gamma n) / rho; the density decays as t^-(1 + alpha_n).
double waiting_time_tail_exponent(const ModelParams& params, std::uint64_t n);

// --- exponents and regimes -----------------------------------------------

TheoreticalExponents theoretical_exponents(const ModelParams& params);
Regime classify_regime(const ModelParams& params);
/// Boundaries 1/2 and 1 are matched with relative tolerance 1e-12.
Regime classify_regime(double gamma_over_rho);

}  // namespace gpp
