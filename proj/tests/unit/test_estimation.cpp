#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "gpp/errors.hpp"
#include "gpp/estimation.hpp"
#include "gpp/experiment.hpp"
#include "support.hpp"

using namespace gpp;

namespace {

const ModelParams kPolya(1.0, 1.0, 1.0);

/// Every path follows X(k h) = f(k).
template <class F>
Ensemble deterministic_ensemble(std::size_t n_paths, double horizon, F f) {
  const EnsembleSpec spec{kPolya, n_paths, horizon, 1.0, 0};
  const std::size_t g = spec.grid_size();
  std::vector<std::uint32_t> counts(n_paths * g);
  std::vector<std::uint64_t> totals(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    for (std::size_t k = 0; k < g; ++k) counts[p * g + k] = static_cast<std::uint32_t>(f(k));
    totals[p] = counts[p * g + g - 1];
  }
  return Ensemble(spec, std::move(counts), std::move(totals));
}

ScalingCurve power_curve(double exponent, double noise = 0.0, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps(0.0, noise);
  ScalingCurve c{Observable::Msd, {}, {}, {}, 1};
  for (int i = 0; i < 50; ++i) {
    const double x = std::pow(10.0, 0.08 * i);
    c.abscissa.push_back(x);
    c.ordinate.push_back(3.0 * std::pow(x, exponent) * (noise > 0 ? 1.0 + eps(rng) : 1.0));
    c.std_error.push_back(0.0);
  }
  return c;
}

bool same_curve(const ScalingCurve& a, const ScalingCurve& b) {
  return a.kind == b.kind && a.abscissa == b.abscissa && a.ordinate == b.ordinate && a.std_error == b.std_error &&
         a.n_paths == b.n_paths;
}

}  // namespace

TEST_CASE("observable names round trip") {
  for (Observable o : {Observable::AbsVelocity, Observable::SqVelocity, Observable::Etamsd, Observable::Msd,
                       Observable::VelocityAutocorrelation})
    CHECK(observable_from_string(to_string(o)) == o);
  CHECK_THROWS_AS(observable_from_string("speed"), std::invalid_argument);
}

TEST_CASE("log-log fit recovers exact and noisy power laws") {
  SUBCASE("exact square") {
    const FitResult f = loglog_fit(power_curve(2.0), {1.0, 1e4});
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK(f.n_points == 50);
  }
  SUBCASE("window restricts the points") {
    const FitResult f = loglog_fit(power_curve(2.0), {10.0, 100.0});
    CHECK(f.n_points == 13);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("flat curve") {
    const FitResult f = loglog_fit(power_curve(0.0), {1.0, 1e4});
    CHECK(std::abs(f.slope) < 1e-14);
    CHECK(f.r_squared == 1.0);
  }
  SUBCASE("one percent noise") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const FitResult f = loglog_fit(power_curve(1.5, 0.01, seed), {1.0, 1e4});
      CHECK(f.slope == doctest::Approx(1.5).epsilon(0.02 / 1.5));
      CHECK(f.r_squared > 0.99);
      CHECK(f.r_squared <= 1.0);
    }
  }
}

TEST_CASE("log-log fit failures") {
  ScalingCurve c = power_curve(1.0);
  for (std::size_t i = 0; i < 12; ++i) c.ordinate[i] = 0.0;
  CHECK_THROWS_AS(loglog_fit(c, {1.0, 1e4}), FitError);  // 12 of 50 > 20%
  c.ordinate[11] = 1.0;
  c.ordinate[10] = 1.0;
  const FitResult f = loglog_fit(c, {1.0, 1e4});  // 10 of 50 is allowed
  CHECK(f.n_zero_excluded == 10);
  CHECK(f.n_points == 40);

  try {
    loglog_fit(power_curve(1.0), {2.0, 3.0});
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(e.observable() == "msd");
  }
  CHECK_THROWS_AS(loglog_fit(power_curve(1.0), {0.0, 3.0}), FitError);
  CHECK_THROWS_AS(loglog_fit(power_curve(1.0), {30.0, 3.0}), FitError);
}

TEST_CASE("constant paths give zero observables") {
  const Ensemble e = deterministic_ensemble(3, 100.0, [](std::size_t) { return 7; });
  const std::vector<double> times{10.0, 50.0, 100.0};
  for (const ScalingCurve& c : {abs_velocity_average(e, 10.0, times), sq_velocity_average(e, 10.0, times),
                                etamsd(e, {1.0, 5.0, 50.0})}) {
    for (double y : c.ordinate) CHECK(y == 0.0);
    for (double s : c.std_error) CHECK(s == 0.0);
  }
  for (double y : msd(e, times).ordinate) CHECK(y == 49.0);
}

TEST_CASE("linear paths give unit velocities and quadratic displacement") {
  const Ensemble e = deterministic_ensemble(4, 200.0, [](std::size_t k) { return k; });
  const std::vector<double> times{20.0, 40.0, 200.0};
  for (double y : abs_velocity_average(e, 20.0, times).ordinate) CHECK(y == doctest::Approx(1.0));
  for (double y : sq_velocity_average(e, 20.0, times).ordinate) CHECK(y == doctest::Approx(1.0));
  const std::vector<double> lags{1.0, 2.0, 7.0, 100.0};
  const ScalingCurve eta = etamsd(e, lags);
  for (std::size_t i = 0; i < lags.size(); ++i) CHECK(eta.ordinate[i] == doctest::Approx(lags[i] * lags[i]));
  CHECK(loglog_fit(eta, {1.0, 100.0}).slope == doctest::Approx(2.0));
  const ScalingCurve ac = velocity_autocorrelation(e, 10.0, {0.0, 1.0, 50.0});
  for (double y : ac.ordinate) CHECK(y == doctest::Approx(1.0));
}

TEST_CASE("quadratic paths are hyperdiffusive with H = 2") {
  const Ensemble e = deterministic_ensemble(2, 1000.0, [](std::size_t k) { return k * k; });
  const ScalingCurve c = msd(e, log_spaced_multiples(1.0, 1000.0, 1.0, 30));
  CHECK(loglog_fit(c, {10.0, 1000.0}).slope / 2.0 == doctest::Approx(2.0));
}

TEST_CASE("observable arguments are checked against the grid") {
  const Ensemble e = deterministic_ensemble(2, 100.0, [](std::size_t k) { return k; });
  CHECK_THROWS_AS(abs_velocity_average(e, 2.5, {5.0}), std::invalid_argument);
  CHECK_THROWS_AS(abs_velocity_average(e, 10.0, {15.0}), std::invalid_argument);
  CHECK_THROWS_AS(abs_velocity_average(e, 10.0, {110.0}), std::invalid_argument);
  CHECK_THROWS_AS(etamsd(e, {51.0}), std::invalid_argument);
  CHECK_THROWS_AS(etamsd(e, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(msd(e, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(velocity_autocorrelation(e, 0.0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(velocity_autocorrelation(e, 90.0, {20.0}), std::invalid_argument);
}

TEST_CASE("expected velocities match independent oracles") {
  SUBCASE("mean velocity telescopes to X(t)/t") {
    for (const ModelParams& p : {kPolya, ModelParams(0.5, 1.25, 2.0), ModelParams(2.0, 0.25, 1.0)})
      for (double t : {10.0, 100.0, 1000.0})
        CHECK(expected_abs_velocity(p, 10.0, t) == doctest::Approx(mean(p, t) / t).epsilon(1e-12));
    for (double t : {1.0, 50.0, 1e4}) CHECK(expected_abs_velocity(kPolya, 1.0, t) == doctest::Approx(1.0));
  }
  SUBCASE("second moment of increments by direct summation of the pmf") {
    const ModelParams p(0.5, 1.5, 1.0);
    const double delta = 2.0, t = 6.0;
    double sum = 0.0;
    for (int j = 1; j <= 3; ++j) {
      const double a = (j - 1) * delta, b = j * delta;
      sum += gpp_test::tail_sum([&](std::uint64_t n) { return double(n) * n * increment_pmf(p, n, a, b); },
                                [&](std::uint64_t n) { return increment_pmf(p, n, a, b); }, 200000);
    }
    CHECK(expected_sq_velocity(p, delta, t) == doctest::Approx(sum / (t * delta)).epsilon(1e-8));
  }
}

TEST_CASE("Monte Carlo observables agree with the closed forms within 3 standard errors") {
  const ModelParams p(1.0, 0.75, 1.0);
  const Ensemble e = simulate_ensemble(EnsembleSpec{p, 2000, 400.0, 1.0, 5});
  const std::vector<double> times{20.0, 100.0, 400.0};
  const ScalingCurve abs = abs_velocity_average(e, 20.0, times);
  const ScalingCurve sq = sq_velocity_average(e, 20.0, times);
  const ScalingCurve m = msd(e, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(std::abs(abs.ordinate[i] - expected_abs_velocity(p, 20.0, times[i])) < 3.0 * abs.std_error[i]);
    CHECK(std::abs(sq.ordinate[i] - expected_sq_velocity(p, 20.0, times[i])) < 3.0 * sq.std_error[i]);
    CHECK(std::abs(m.ordinate[i] - expected_msd(p, times[i])) < 3.0 * m.std_error[i]);
  }
}

TEST_CASE("ETAMSD at one step equals the squared velocity at the horizon times h squared") {
  const Ensemble e = simulate_ensemble(EnsembleSpec{ModelParams(1.0, 1.25, 1.0), 50, 300.0, 1.0, 8});
  const double eta = etamsd(e, {1.0}).ordinate[0];
  const double sq = sq_velocity_average(e, 1.0, {300.0}).ordinate[0];
  CHECK(eta == doctest::Approx(sq).epsilon(1e-12));
}

TEST_CASE("log-spaced multiples") {
  const auto v = log_spaced_multiples(10.0, 1000.0, 10.0, 40);
  CHECK(v.front() == 10.0);
  CHECK(v.back() == 1000.0);
  CHECK(std::is_sorted(v.begin(), v.end()));
  CHECK(std::adjacent_find(v.begin(), v.end()) == v.end());
  for (double x : v) CHECK(std::fmod(x, 10.0) == 0.0);
  CHECK(v.size() <= 40);
  CHECK(log_spaced_multiples(3.0, 3.0, 1.0, 40) == std::vector<double>{3.0});
}

TEST_CASE("default plans are feasible for every reference row") {
  for (const ExperimentRow& row : paper_config().rows) {
    CAPTURE(row.label());
    EstimationPlan plan = EstimationPlan::make_default(row.horizon, row.sampling_period, row.delta);
    CHECK_NOTHROW(plan.validate(row.horizon, row.sampling_period));
    CHECK(plan.velocity_times.back() == row.horizon);
    CHECK(plan.msd_times.back() == row.horizon);
    CHECK(plan.etamsd_lags.back() == row.delta);
    CHECK(plan.velocity_window.lo == std::max(10.0, 2.0 * row.delta));
    CHECK(plan.msd_window == FitWindow{10.0, row.horizon});
    CHECK(plan.velocity_times.size() >= std::min<std::size_t>(10, row.horizon / row.delta));
    CHECK(plan.etamsd_lags.size() >= 10);
    CHECK(plan.msd_times.size() >= 10);
  }
  EstimationPlan plan = EstimationPlan::make_default(1000.0, 1.0, 50.0);
  plan.apply({FitWindow{100.0, 500.0}, std::nullopt, FitWindow{20.0, 900.0}});
  CHECK(plan.velocity_window == FitWindow{100.0, 500.0});
  CHECK(plan.etamsd_window == FitWindow{10.0, 50.0});
  CHECK(plan.msd_window == FitWindow{20.0, 900.0});
  CHECK_THROWS_AS(EstimationPlan::make_default(1000.0, 1.0, 2.5), std::invalid_argument);
}

TEST_CASE("pipeline agrees with the standalone observables for any thread count") {
  const Ensemble e = simulate_ensemble(EnsembleSpec{ModelParams(1.0, 1.5, 1.0), 40, 500.0, 1.0, 21});
  const EstimationPlan plan = EstimationPlan::make_default(500.0, 1.0, 25.0);
  const ExponentReport a = estimate_exponents(e, plan, 1);
  REQUIRE(a.curves.size() == 4);
  CHECK(same_curve(a.curves[0], abs_velocity_average(e, 25.0, plan.velocity_times, 1)));
  CHECK(same_curve(a.curves[1], sq_velocity_average(e, 25.0, plan.velocity_times, 1)));
  CHECK(same_curve(a.curves[2], etamsd(e, plan.etamsd_lags, 1)));
  CHECK(same_curve(a.curves[3], msd(e, plan.msd_times, 1)));
  for (unsigned threads : {2u, 3u, 0u}) {
    const ExponentReport b = estimate_exponents(e, plan, threads);
    CHECK(b.moses == a.moses);
    CHECK(b.noah == a.noah);
    CHECK(b.joseph == a.joseph);
    CHECK(b.hurst == a.hurst);
  }

  ExponentPipeline reversed(plan, e.size(), 500.0, 1.0);
  for (std::size_t i = e.size(); i-- > 0;) reversed.accumulate(i, e.path(i));
  CHECK(reversed.report().hurst == a.hurst);
  ExponentPipeline partial(plan, e.size(), 500.0, 1.0);
  partial.accumulate(0, e.path(0));
  CHECK_THROWS_AS(partial.curves(), std::logic_error);
}

TEST_CASE("exponent mapping from fitted slopes") {
  const EstimationPlan plan = EstimationPlan::make_default(1000.0, 1.0, 50.0);
  auto curve = [](Observable kind, const std::vector<double>& xs, double exponent) {
    ScalingCurve c{kind, xs, {}, std::vector<double>(xs.size(), 0.0), 10};
    for (double x : xs) c.ordinate.push_back(std::pow(x, exponent));
    return c;
  };
  // M = 0.8, L = 0.6, J = 0.9, H = 1.3
  const ExponentReport r = exponents_from_curves(
      {curve(Observable::AbsVelocity, plan.velocity_times, 0.3), curve(Observable::SqVelocity, plan.velocity_times, 0.8),
       curve(Observable::Etamsd, plan.etamsd_lags, 1.8), curve(Observable::Msd, plan.msd_times, 2.6)},
      plan);
  CHECK(r.moses == doctest::Approx(0.8));
  CHECK(r.noah == doctest::Approx(0.6));
  CHECK(r.joseph == doctest::Approx(0.9));
  CHECK(r.hurst == doctest::Approx(1.3));
  CHECK(std::abs(r.relation_residual) < 1e-12);
  CHECK_FALSE(r.relation_flagged());

  const ExponentReport off = exponents_from_curves(
      {curve(Observable::AbsVelocity, plan.velocity_times, 0.3), curve(Observable::SqVelocity, plan.velocity_times, 0.8),
       curve(Observable::Etamsd, plan.etamsd_lags, 1.8), curve(Observable::Msd, plan.msd_times, 3.0)},
      plan);
  CHECK(off.relation_residual == doctest::Approx(0.2));
  CHECK(off.relation_flagged());
}

TEST_CASE("curve files round trip exactly") {
  gpp_test::TempDir dir("curves");
  const Ensemble e = simulate_ensemble(EnsembleSpec{ModelParams(1.0, 0.5, 1.0), 30, 100.0, 1.0, 2});
  const ScalingCurve c = msd(e, log_spaced_multiples(1.0, 100.0, 1.0, 20));
  write_curve_csv(c, (dir / "c.csv").string());
  CHECK(same_curve(read_curve_csv((dir / "c.csv").string()), c));
  CHECK(same_curve(curve_from_json(curve_to_json(c)), c));
  CHECK(gpp_test::slurp(dir / "c.csv").rfind("# gpp-curve v1\n", 0) == 0);
  CHECK_THROWS_AS(curve_from_json("{\"format\":\"gpp-curve\",\"version\":2}"), FormatError);
  CHECK_THROWS_AS(read_curve_csv((dir / "missing.csv").string()), Error);
}
