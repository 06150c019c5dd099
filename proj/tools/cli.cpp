#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpp/ensemble_io.hpp"
#include "gpp/errors.hpp"
#include "gpp/estimation.hpp"
#include "gpp/experiment.hpp"
#include "gpp/format.hpp"
#include "gpp/parallel.hpp"

namespace gppsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kOutputEnv = "GPPSIM_OUTPUT_DIR";
constexpr std::size_t kMemoryBudgetMb = 512;

fs::path default_output_dir() {
  const char* env = std::getenv(kOutputEnv);
  return env && *env ? fs::path(env) : fs::path(".");
}

/// Console summaries carry 4 significant digits in every format.
double console(double v) { return gpp::parse_double(gpp::format_double(v, 4)); }
std::string console_text(double v) { return gpp::format_double(v, 4); }

struct Common {
  std::uint64_t seed = gpp::kDefaultBaseSeed;
  std::string output;
  std::string format = "csv";
  unsigned threads = 0;
};

void add_common(CLI::App* sub, Common& c, const std::string& output_names = "-o,--output,--out") {
  sub->add_option("--seed", c.seed, "Base random seed")->capture_default_str();
  sub->add_option(output_names, c.output, "Output file or directory");
  sub->add_option("--format", c.format, "Serialization: csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

gpp::OutputFormat format_of(const Common& c) { return gpp::output_format_from_string(c.format); }

void write_atomically(const fs::path& file, const std::string& text) {
  const fs::path tmp = file.string() + ".partial";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw gpp::Error("cannot create " + tmp.string());
    out << text;
    if (!out) throw gpp::Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, file);
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  Common common;
  double beta = 0, gamma = 0, rho = 0, horizon = 0, sampling_period = 0;
  std::size_t paths = 0;
  std::uint64_t event_cap = gpp::kDefaultEventCap;
  std::string events_file;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const gpp::EnsembleSpec spec{gpp::ModelParams(a.beta, a.gamma, a.rho), a.paths, a.horizon, a.sampling_period,
                               a.common.seed, a.event_cap};
  spec.validate();
  const gpp::OutputFormat format = format_of(a.common);
  fs::path file = a.common.output.empty() ? default_output_dir() / "ensemble.gppe" : fs::path(a.common.output);
  if (fs::is_directory(file)) file /= "ensemble.gppe";
  if (file.has_parent_path()) fs::create_directories(file.parent_path());

  const std::size_t grid = spec.grid_size();
  const std::size_t batch = std::clamp<std::size_t>(kMemoryBudgetMb * 1024 * 1024 / 4 / grid, 1, spec.n_paths);
  const fs::path tmp = file.string() + ".partial";
  std::uint64_t lo = UINT64_MAX, hi = 0;
  double sum = 0.0;
  try {
    gpp::EnsembleWriter writer(tmp, spec);
    std::vector<std::uint32_t> counts(batch * grid);
    std::vector<std::uint64_t> totals(batch);
    for (std::size_t first = 0; first < spec.n_paths; first += batch) {
      const std::size_t n = std::min(batch, spec.n_paths - first);
      gpp::parallel_for(n, a.common.threads, [&](std::size_t i) {
        try {
          totals[i] = gpp::simulate_counts(spec.params, spec.horizon, spec.sampling_period, spec.path_seed(first + i),
                                           std::span<std::uint32_t>(counts.data() + i * grid, grid), spec.event_cap);
        } catch (const gpp::CapacityError& e) {
          throw e.with_path_index(first + i);
        }
      });
      for (std::size_t i = 0; i < n; ++i) {
        writer.append(std::span<const std::uint32_t>(counts.data() + i * grid, grid), totals[i]);
        lo = std::min(lo, totals[i]);
        hi = std::max(hi, totals[i]);
        sum += static_cast<double>(totals[i]);
      }
    }
    writer.close();
    fs::rename(tmp, file);
  } catch (...) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }

  if (!a.events_file.empty()) {
    std::vector<gpp::Trajectory> trajectories;
    for (std::size_t i = 0; i < spec.n_paths; ++i)
      trajectories.push_back(gpp::simulate_trajectory(spec.params, spec.horizon, spec.path_seed(i), spec.event_cap));
    gpp::write_event_times(trajectories, a.events_file);
  }

  const double mean = sum / static_cast<double>(spec.n_paths);
  if (format == gpp::OutputFormat::Json) {
    out << json{{"file", file.string()},
                {"paths", spec.n_paths},
                {"grid_size", grid},
                {"seed", spec.base_seed},
                {"events", {{"min", lo}, {"mean", console(mean)}, {"max", hi}}}}
               .dump(2)
        << '\n';
  } else {
    out << "file,paths,grid_size,seed,events_min,events_mean,events_max\n"
        << file.string() << ',' << spec.n_paths << ',' << grid << ',' << spec.base_seed << ',' << lo << ','
        << console_text(mean) << ',' << hi << '\n';
  }
  return kOk;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeArgs {
  Common common;
  std::string ensemble;
  double delta = 0;
  std::optional<double> fit_lo, fit_hi, etamsd_lo, etamsd_hi;
  std::size_t points = 40;
};

std::optional<gpp::FitWindow> window_from(std::optional<double> lo, std::optional<double> hi,
                                          const gpp::FitWindow& fallback) {
  if (!lo && !hi) return std::nullopt;
  return gpp::FitWindow{lo.value_or(fallback.lo), hi.value_or(fallback.hi)};
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const gpp::OutputFormat format = format_of(a.common);
  const gpp::EnsembleSpec spec = gpp::read_ensemble_header(a.ensemble);
  gpp::EstimationPlan plan = gpp::EstimationPlan::make_default(spec.horizon, spec.sampling_period, a.delta, a.points);
  gpp::FitWindowOverrides overrides;
  overrides.velocity = window_from(a.fit_lo, a.fit_hi, plan.velocity_window);
  overrides.msd = window_from(a.fit_lo, a.fit_hi, plan.msd_window);
  overrides.etamsd = window_from(a.etamsd_lo, a.etamsd_hi, plan.etamsd_window);
  plan.apply(overrides);
  plan.validate(spec.horizon, spec.sampling_period);

  gpp::ExponentPipeline pipeline(plan, spec.n_paths, spec.horizon, spec.sampling_period);
  gpp::EnsembleReader reader(a.ensemble);
  std::vector<std::uint32_t> counts;
  std::uint64_t total = 0;
  for (std::size_t i = 0; reader.next(counts, total); ++i)
    pipeline.accumulate(i, gpp::PathView{counts, spec.sampling_period});
  const gpp::ExponentReport rep = pipeline.report();

  const fs::path ens(a.ensemble);
  const fs::path dir = a.common.output.empty() ? ens.parent_path() : fs::path(a.common.output);
  if (!dir.empty()) fs::create_directories(dir);
  const std::string stem = ens.stem().string();
  for (const gpp::ScalingCurve& c : rep.curves) {
    const std::string name = stem + "." + std::string(gpp::to_string(c.kind));
    if (format == gpp::OutputFormat::Csv) gpp::write_curve_csv(c, (dir / (name + ".csv")).string());
    else write_atomically(dir / (name + ".json"), gpp::curve_to_json(c) + "\n");
  }
  write_atomically(dir / (stem + ".fits.json"), gpp::report_to_json(rep) + "\n");

  if (format == gpp::OutputFormat::Json) {
    out << json{{"moses", console(rep.moses)},
                {"noah", console(rep.noah)},
                {"joseph", console(rep.joseph)},
                {"hurst", console(rep.hurst)},
                {"relation_residual", console(rep.relation_residual)},
                {"relation_flagged", rep.relation_flagged()},
                {"r_squared",
                 {console(rep.abs_velocity_fit.r_squared), console(rep.sq_velocity_fit.r_squared),
                  console(rep.etamsd_fit.r_squared), console(rep.msd_fit.r_squared)}}}
               .dump(2)
        << '\n';
  } else {
    out << "moses,noah,joseph,hurst,relation_residual,relation_flagged\n"
        << console_text(rep.moses) << ',' << console_text(rep.noah) << ',' << console_text(rep.joseph) << ','
        << console_text(rep.hurst) << ',' << console_text(rep.relation_residual) << ','
        << (rep.relation_flagged() ? "yes" : "no") << '\n';
  }
  return kOk;
}

// --------------------------------------------------------------------- pmf

struct PmfArgs {
  Common common;
  std::string kind;
  double beta = 0, gamma = 0, rho = 0;
  std::optional<double> s, t, s1, t1, s2, t2;
  std::uint64_t k = 0;
  std::string range = "0:10";
};

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const std::uint64_t n = std::stoull(text);
      return {0, n};
    }
    const std::uint64_t lo = std::stoull(text.substr(0, colon));
    const std::uint64_t hi = std::stoull(text.substr(colon + 1));
    if (lo > hi) throw std::invalid_argument("range lower end exceeds upper end");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw std::invalid_argument("--range must look like 0:10");
  }
}

double need(const std::optional<double>& v, const char* flag, const std::string& kind) {
  if (!v) throw std::invalid_argument(std::string(flag) + " is required for --kind " + kind);
  return *v;
}

int cmd_pmf(const PmfArgs& a, std::ostream& out) {
  const gpp::ModelParams p(a.beta, a.gamma, a.rho);
  const auto [lo, hi] = parse_range(a.range);
  json values = json::array();
  json summary = json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  if (a.kind == "joint") {
    const double s1 = need(a.s1, "--s1", a.kind), t1 = need(a.t1, "--t1", a.kind);
    const double s2 = need(a.s2, "--s2", a.kind), t2 = need(a.t2, "--t2", a.kind);
    const gpp::JointIncrementLaw law = gpp::joint_increment_law(p, s1, t1, s2, t2);
    columns = {"n1", "n2", "pmf"};
    for (std::uint64_t n1 = lo; n1 <= hi; ++n1)
      for (std::uint64_t n2 = lo; n2 <= hi; ++n2)
        rows.push_back({static_cast<double>(n1), static_cast<double>(n2),
                        gpp::joint_increment_pmf(p, n1, n2, s1, t1, s2, t2)});
    summary = {{"shape", law.shape},
               {"p0", law.p0},
               {"p1", law.p1},
               {"p2", law.p2},
               {"covariance", gpp::increment_covariance(p, s1, t1, s2, t2)}};
  } else {
    const double s = need(a.s, "--s", a.kind), t = need(a.t, "--t", a.kind);
    if (!(t >= s) || !(s >= 0.0)) throw std::invalid_argument("need 0 <= s <= t");
    columns = {"n", "pmf"};
    if (a.kind == "transition") {
      for (std::uint64_t n = lo; n <= hi; ++n) rows.push_back({static_cast<double>(n), gpp::transition_pmf(p, a.k, n, s, t)});
      const double q = std::exp(-p.gamma() * gpp::cumulative_intensity(p, s, t));
      const double shape = p.shape() + static_cast<double>(a.k);
      summary = {{"initial_state", a.k}, {"mean", shape * (1.0 - q) / q}, {"variance", shape * (1.0 - q) / (q * q)}};
    } else {
      for (std::uint64_t n = lo; n <= hi; ++n) rows.push_back({static_cast<double>(n), gpp::increment_pmf(p, n, s, t)});
      summary = {{"mean", gpp::increment_mean(p, s, t)}, {"variance", gpp::increment_variance(p, s, t)}};
    }
  }

  std::ostringstream text;
  if (format_of(a.common) == gpp::OutputFormat::Json) {
    for (const auto& r : rows) {
      json v = json::object();
      for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c] == "pmf") v[columns[c]] = r[c];
        else v[columns[c]] = static_cast<std::uint64_t>(r[c]);
      }
      values.push_back(std::move(v));
    }
    text << json{{"format", "gpp-pmf"},
                 {"version", 1},
                 {"kind", a.kind},
                 {"params", {{"beta", p.beta()}, {"gamma", p.gamma()}, {"rho", p.rho()}}},
                 {"summary", summary},
                 {"values", values}}
                .dump(2)
         << '\n';
  } else {
    text << "# gpp-pmf v1\n# kind " << a.kind << '\n';
    for (auto it = summary.begin(); it != summary.end(); ++it)
      text << "# " << it.key() << ' '
           << (it.value().is_number_float() ? gpp::format_double(it.value().get<double>()) : it.value().dump()) << '\n';
    for (std::size_t c = 0; c < columns.size(); ++c) text << (c ? "," : "") << columns[c];
    text << '\n';
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c)
        text << (c ? "," : "") << (columns[c] == "pmf" ? gpp::format_double(r[c]) : std::to_string(static_cast<std::uint64_t>(r[c])));
      text << '\n';
    }
  }
  if (a.common.output.empty()) {
    out << text.str();
  } else {
    const fs::path file(a.common.output);
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    write_atomically(file, text.str());
  }
  return kOk;
}

// --------------------------------------------------------------- reproduce

struct ReproduceArgs {
  Common common;
  bool seed_given = false;
  std::string config;
  std::string profile;
  std::vector<std::string> rows;
  bool compare = false;
  bool parallel_rows = false;
  bool write_ensembles = false;
  std::size_t memory_budget_mb = kMemoryBudgetMb;
};

int cmd_reproduce(const ReproduceArgs& a, std::ostream& out, std::ostream& err) {
  if (!a.config.empty() && !a.profile.empty()) throw std::invalid_argument("give --config or --profile, not both");
  gpp::ExperimentConfig config =
      a.config.empty() ? gpp::profile_config(a.profile.empty() ? "desk-scale" : a.profile) : gpp::load_config(a.config);
  if (!a.rows.empty()) config = gpp::select_rows(config, a.rows);
  if (a.seed_given) config.base_seed = a.common.seed;
  config.format = format_of(a.common);
  config.threads = a.common.threads;
  config.parallel_rows = config.parallel_rows || a.parallel_rows;
  config.write_ensembles = config.write_ensembles || a.write_ensembles;
  config.memory_budget_mb = a.memory_budget_mb;
  if (!a.common.output.empty()) config.output_dir = a.common.output;
  else if (a.config.empty()) config.output_dir = default_output_dir() / ("reproduce-" + config.profile);
  config.validate();

  gpp::RunCallbacks callbacks;
  callbacks.row_done = [&err](const gpp::ExperimentRow&, const gpp::ResultRow& r) {
    err << "row " << r.label << (r.ok() ? " done" : " FAILED: " + r.error) << " (" << console_text(r.wall_time_s)
        << " s)\n";
  };
  const gpp::ResultsTable table = gpp::run_experiment(config, callbacks);

  bool any_error = false;
  if (config.format == gpp::OutputFormat::Json) {
    json rows = json::array();
    for (const gpp::ResultRow& r : table.rows) {
      json j = {{"label", r.label}, {"seed", r.seed}, {"status", r.ok() ? "ok" : "error"}};
      if (r.ok()) {
        j["moses"] = console(r.moses);
        j["noah"] = console(r.noah);
        j["joseph"] = console(r.joseph);
        j["hurst"] = console(r.hurst);
      } else {
        j["error"] = r.error;
      }
      rows.push_back(std::move(j));
      any_error = any_error || !r.ok();
    }
    out << json{{"output_dir", config.output_dir.string()}, {"rows", rows}}.dump(2) << '\n';
  } else {
    out << "label,moses,noah,joseph,hurst,status\n";
    for (const gpp::ResultRow& r : table.rows) {
      if (r.ok())
        out << r.label << ',' << console_text(r.moses) << ',' << console_text(r.noah) << ',' << console_text(r.joseph)
            << ',' << console_text(r.hurst) << ",ok\n";
      else
        out << r.label << ",NA,NA,NA,NA,error\n";
      any_error = any_error || !r.ok();
    }
  }

  if (a.compare) {
    const gpp::ComparisonReport report =
        gpp::compare_to_reference(table, gpp::reference_table(), gpp::reference_tolerances());
    const std::string text = gpp::comparison_to_text(report);
    write_atomically(config.output_dir / "comparison.txt", text);
    err << text;
    if (!report.pass) return kComparisonFailed;
  }
  return any_error ? kRuntime : kOk;
}

// ----------------------------------------------------------------- figures

struct FiguresArgs {
  Common common;
  std::string which;
};

int cmd_figures(const FiguresArgs& a, std::ostream& out) {
  const gpp::FigureKind kind = gpp::figure_kind_from_string(a.which);
  gpp::FigureOptions options;
  options.format = format_of(a.common);
  options.seed = a.common.seed;
  options.threads = a.common.threads;
  const fs::path dir = a.common.output.empty() ? default_output_dir() / "figures" : fs::path(a.common.output);
  for (const fs::path& f : gpp::emit_figure_data(kind, dir, options)) out << f.string() << '\n';
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate and analyze the three-parameter BPM generalized Polya process", "gppsim"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Simulate an ensemble of paths and write it to a file");
  add_common(simulate, sim.common);
  simulate->add_option("--beta", sim.beta, "Baseline rate beta > 0")->required();
  simulate->add_option("--gamma", sim.gamma, "Contagion gamma > 0")->required();
  simulate->add_option("--rho", sim.rho, "Damping rho > 0")->required();
  simulate->add_option("--horizon", sim.horizon, "Time horizon T")->required();
  simulate->add_option("--paths", sim.paths, "Number of paths N")->required();
  simulate->add_option("--sampling-period", sim.sampling_period, "Grid spacing h")->required();
  simulate->add_option("--event-cap", sim.event_cap, "Maximum events per path")->capture_default_str();
  simulate->add_option("--events-file", sim.events_file, "Also write raw event times here");

  AnalyzeArgs ana;
  CLI::App* analyze = app.add_subcommand("analyze", "Estimate the four exponents from an ensemble file");
  add_common(analyze, ana.common);
  analyze->add_option("--ensemble", ana.ensemble, "Ensemble file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--delta", ana.delta, "Increment gap, a multiple of h")->required();
  analyze->add_option("--fit-lo", ana.fit_lo, "Lower fit bound for velocity and MSD curves");
  analyze->add_option("--fit-hi", ana.fit_hi, "Upper fit bound for velocity and MSD curves");
  analyze->add_option("--etamsd-lo", ana.etamsd_lo, "Lower fit bound for the ETAMSD lag");
  analyze->add_option("--etamsd-hi", ana.etamsd_hi, "Upper fit bound for the ETAMSD lag");
  analyze->add_option("--points", ana.points, "Evaluation points per curve")->capture_default_str();

  PmfArgs pmf;
  CLI::App* pmf_cmd = app.add_subcommand("pmf", "Print transition, increment or joint increment probabilities");
  add_common(pmf_cmd, pmf.common);
  pmf_cmd->add_option("--kind", pmf.kind, "transition, increment or joint")
      ->required()
      ->check(CLI::IsMember({"transition", "increment", "joint"}));
  pmf_cmd->add_option("--beta", pmf.beta)->required();
  pmf_cmd->add_option("--gamma", pmf.gamma)->required();
  pmf_cmd->add_option("--rho", pmf.rho)->required();
  pmf_cmd->add_option("--s", pmf.s, "Start time");
  pmf_cmd->add_option("--t", pmf.t, "End time");
  pmf_cmd->add_option("--k", pmf.k, "State at time s (transition only)");
  pmf_cmd->add_option("--s1", pmf.s1);
  pmf_cmd->add_option("--t1", pmf.t1);
  pmf_cmd->add_option("--s2", pmf.s2);
  pmf_cmd->add_option("--t2", pmf.t2);
  pmf_cmd->add_option("--range", pmf.range, "Values lo:hi")->capture_default_str();

  ReproduceArgs rep;
  CLI::App* reproduce = app.add_subcommand("reproduce", "Run the exponent table experiment");
  add_common(reproduce, rep.common);
  reproduce->add_option("--config", rep.config, "Experiment config file (JSON)")->check(CLI::ExistingFile);
  reproduce->add_option("--profile", rep.profile, "paper or desk-scale (default desk-scale)")
      ->check(CLI::IsMember({"paper", "desk-scale"}));
  reproduce->add_option("--rows", rep.rows, "Comma-separated gamma/rho labels, e.g. 1,5/4")->delimiter(',');
  reproduce->add_flag("--compare", rep.compare, "Compare against the reference table; exit 3 on mismatch");
  reproduce->add_flag("--parallel-rows", rep.parallel_rows, "Run rows concurrently");
  reproduce->add_flag("--write-ensembles", rep.write_ensembles, "Keep each row's ensemble file");
  reproduce->add_option("--memory-budget-mb", rep.memory_budget_mb, "Grid memory per batch")->capture_default_str();

  FiguresArgs fig;
  CLI::App* figures = app.add_subcommand("figures", "Write plot-ready data for figures 1-4");
  add_common(figures, fig.common, "-o,--output,--out,--out-dir");
  figures->add_option("--which", fig.which, "Figure 1, 2, 3 or 4")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  rep.seed_given = reproduce->count("--seed") > 0;

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*analyze) return cmd_analyze(ana, out);
    if (*pmf_cmd) return cmd_pmf(pmf, out);
    if (*reproduce) return cmd_reproduce(rep, out, err);
    if (*figures) return cmd_figures(fig, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

}  // namespace gppsim
