#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "gpp/errors.hpp"
#include "gpp/experiment.hpp"
#include "gpp/format.hpp"
#include "row_run.hpp"

namespace gpp {

namespace {

using nlohmann::json;

struct FigureTable {
  std::string name;
  json metadata = json::object();
  std::vector<std::string> columns;
  std::vector<json> rows;  // each a json array matching columns
};

std::filesystem::path write_table(const FigureTable& t, FigureKind kind, const std::filesystem::path& dir,
                                  OutputFormat format) {
  const std::filesystem::path file = dir / (t.name + (format == OutputFormat::Csv ? ".csv" : ".json"));
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error("cannot create " + file.string());
  if (format == OutputFormat::Json) {
    json j = {{"format", "gpp-figure"}, {"version", 1},     {"figure", std::string(to_string(kind))},
              {"metadata", t.metadata}, {"columns", t.columns}, {"rows", t.rows}};
    out << j.dump(1) << '\n';
  } else {
    out << "# gpp-figure v1\n# figure " << to_string(kind) << '\n';
    for (auto it = t.metadata.begin(); it != t.metadata.end(); ++it) {
      out << "# " << it.key() << ' ';
      if (it.value().is_number()) out << format_double(it.value().get<double>());
      else if (it.value().is_string()) out << it.value().get<std::string>();
      else out << it.value().dump();
      out << '\n';
    }
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
    out << '\n';
    for (const json& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out << ',';
        if (row[c].is_string()) out << row[c].get<std::string>();
        else if (row[c].is_number_integer()) out << row[c].dump();
        else out << format_double(row[c].get<double>());
      }
      out << '\n';
    }
  }
  if (!out) throw Error("write failed: " + file.string());
  return file;
}

FigureTable autocorrelation_table() {
  constexpr double s = 1.0;
  FigureTable t{"autocorrelation", {{"s", s}, {"beta", 1.0}, {"rho", 1.0}},
                {"gamma_over_rho", "t", "autocorrelation", "limit"}, {}};
  for (const char* ratio : {"1/4", "1/2", "1", "2"}) {
    const Rational q = Rational::parse(ratio);
    const ModelParams p(1.0, q.value(), 1.0);
    const double limit = autocorrelation_limit(p, s);
    for (int k = 0; k <= 80; ++k) {
      const double tt = s + std::pow(10.0, -2.0 + 0.1 * k);
      t.rows.push_back(json::array({q.str(), tt, autocorrelation(p, s, tt), limit}));
    }
  }
  return t;
}

FigureTable regime_table() {
  FigureTable t{"regime_diagram", {{"grid_step", 0.05}}, {"rho", "gamma", "hurst", "regime"}, {}};
  for (int i = 1; i <= 40; ++i) {
    for (int j = 1; j <= 40; ++j) {
      const double rho = 0.05 * i, gamma = 0.05 * j;
      const ModelParams p(1.0, gamma, rho);
      t.rows.push_back(json::array({rho, gamma, p.hurst(), std::string(to_string(classify_regime(p)))}));
    }
  }
  return t;
}

/// Interval length giving the target increment mean at ratio tau/s.
double tau_for_mean(const ModelParams& p, double ratio, double target) {
  auto mean_at = [&](double tau) { return increment_mean(p, tau / ratio, tau / ratio + tau); };
  double lo = 0.0, hi = 1.0;
  while (mean_at(hi) < target) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mean_at(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

FigureTable increment_pmf_table() {
  constexpr double kCommonMean = 10.0;
  FigureTable t{"increment_pmf",
                {{"common_mean", kCommonMean}},
                {"case", "gamma", "tau_over_s", "s", "tau", "n", "pmf", "gaussian", "variance", "excess_kurtosis"},
                {}};
  struct Case {
    const char* name;
    double gamma;
  };
  for (const Case c : {Case{"ballistic", 1.0}, Case{"hyperballistic", 1.5}}) {
    const ModelParams p(1.0, c.gamma, 1.0);
    for (double ratio : {0.1, 1.0, 10.0}) {
      const double tau = tau_for_mean(p, ratio, kCommonMean);
      const double s = tau / ratio;
      const double mu = increment_mean(p, s, s + tau);
      const double var = increment_variance(p, s, s + tau);
      std::vector<double> pmf;
      double mass = 0.0, m2 = 0.0, m4 = 0.0;
      for (std::uint64_t n = 0; mass < 1.0 - 1e-13 || static_cast<double>(n) <= mu; ++n) {
        pmf.push_back(increment_pmf(p, n, s, s + tau));
        const double d = static_cast<double>(n) - mu;
        mass += pmf.back();
        m2 += pmf.back() * d * d;
        m4 += pmf.back() * d * d * d * d;
      }
      const double kurt = m4 / (m2 * m2) - 3.0;
      for (std::uint64_t n = 0; n < pmf.size(); ++n) {
        const double d = static_cast<double>(n) - mu;
        const double gauss = std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
        t.rows.push_back(json::array({c.name, c.gamma, ratio, s, tau, n, pmf[n], gauss, var, kurt}));
      }
    }
  }
  return t;
}

std::vector<FigureTable> scaling_tables(const FigureOptions& options) {
  ExperimentRow row = options.row ? *options.row : paper_config().rows.at(2);
  const EstimationPlan plan = detail::row_plan(row, {}, 40);
  const ExponentReport rep = detail::simulate_and_estimate(row, options.seed, plan, options.threads, 512, std::nullopt);
  const FitResult* fits[] = {&rep.abs_velocity_fit, &rep.sq_velocity_fit, &rep.etamsd_fit, &rep.msd_fit};
  std::vector<FigureTable> out;
  for (std::size_t i = 0; i < rep.curves.size(); ++i) {
    const ScalingCurve& c = rep.curves[i];
    const FitResult& f = *fits[i];
    FigureTable t{"scaling_" + std::string(to_string(c.kind)),
                  {{"label", row.label()},
                   {"seed", options.seed},
                   {"n_paths", row.n_paths},
                   {"horizon", row.horizon},
                   {"delta", row.delta},
                   {"slope", f.slope},
                   {"intercept", f.intercept},
                   {"r_squared", f.r_squared},
                   {"window_lo", f.window.lo},
                   {"window_hi", f.window.hi}},
                  {"abscissa", "ordinate", "std_error", "fitted", "in_window"},
                  {}};
    for (std::size_t k = 0; k < c.size(); ++k) {
      const double fitted = std::exp(f.intercept) * std::pow(c.abscissa[k], f.slope);
      t.rows.push_back(json::array({c.abscissa[k], c.ordinate[k], c.std_error[k], fitted,
                                    f.window.contains(c.abscissa[k]) ? 1 : 0}));
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::string_view to_string(FigureKind kind) noexcept {
  switch (kind) {
    case FigureKind::Autocorrelation: return "autocorrelation";
    case FigureKind::RegimeDiagram: return "regime_diagram";
    case FigureKind::IncrementPmf: return "increment_pmf";
    case FigureKind::ScalingCurves: return "scaling_curves";
  }
  return "unknown";
}

FigureKind figure_kind_from_string(std::string_view name) {
  const FigureKind all[] = {FigureKind::Autocorrelation, FigureKind::RegimeDiagram, FigureKind::IncrementPmf,
                            FigureKind::ScalingCurves};
  for (std::size_t i = 0; i < 4; ++i)
    if (name == to_string(all[i]) || name == std::to_string(i + 1)) return all[i];
  throw std::invalid_argument("unknown figure '" + std::string(name) + "' (expected 1-4 or a figure name)");
}

std::vector<std::filesystem::path> emit_figure_data(FigureKind kind, const std::filesystem::path& out_dir,
                                                    const FigureOptions& options) {
  std::vector<FigureTable> tables;
  switch (kind) {
    case FigureKind::Autocorrelation: tables.push_back(autocorrelation_table()); break;
    case FigureKind::RegimeDiagram: tables.push_back(regime_table()); break;
    case FigureKind::IncrementPmf: tables.push_back(increment_pmf_table()); break;
    case FigureKind::ScalingCurves: tables = scaling_tables(options); break;
  }
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> files;
  for (const FigureTable& t : tables) files.push_back(write_table(t, kind, out_dir, options.format));
  return files;
}

}  // namespace gpp
