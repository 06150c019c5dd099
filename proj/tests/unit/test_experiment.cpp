#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include <json.hpp>

#include "gpp/errors.hpp"
#include "gpp/ensemble_io.hpp"
#include "gpp/experiment.hpp"
#include "support.hpp"

using namespace gpp;
using gpp_test::slurp;
using gpp_test::TempDir;
namespace fs = std::filesystem;

namespace {

ExperimentRow polya_row(std::size_t n_paths, double horizon, double delta) {
  return ExperimentRow{Rational(1, 1), ModelParams(1.0, 1.0, 1.0), n_paths, horizon, delta, 1.0, {}};
}

std::string key_of_error(const std::string& text) {
  try {
    config_from_json(text);
  } catch (const FormatError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("rationals") {
  CHECK(Rational::parse("3/4") == Rational(3, 4));
  CHECK(Rational::parse("6/8") == Rational(3, 4));
  CHECK(Rational::parse("2").str() == "2");
  CHECK(Rational::parse("4/2").str() == "2");
  CHECK(Rational::parse("5/4").value() == 1.25);
  for (const char* bad : {"", "0", "-1/2", "1/0", "a/b", "1/2/3", "1.5", "3/"})
    CHECK_THROWS_AS(Rational::parse(bad), std::invalid_argument);
}

TEST_CASE("row labels and seeds") {
  const ExperimentRow r{Rational(3, 4), ModelParams(1.0, 0.75, 1.0), 10, 100.0, 10.0, 1.0, {}};
  CHECK(r.label() == "3/4");
  CHECK(row_directory("3/4") == "row_3_4");
  CHECK(row_seed(1, "3/4") == row_seed(1, "3/4"));
  CHECK(row_seed(1, "3/4") != row_seed(1, "5/4"));
  CHECK(row_seed(1, "3/4") != row_seed(2, "3/4"));
  const ExperimentRow unlabeled{std::nullopt, ModelParams(2.0, 0.5, 2.0), 10, 100.0, 10.0, 1.0, {}};
  CHECK(unlabeled.label() == "0.25");
}

TEST_CASE("built-in profiles") {
  const ExperimentConfig paper = paper_config();
  REQUIRE(paper.rows.size() == 7);
  const char* labels[] = {"1/4", "1/2", "3/4", "1", "5/4", "3/2", "2"};
  const double horizons[] = {1e6, 1e5, 2e4, 8e3, 2e3, 1e3, 200};
  const double deltas[] = {1e4, 1e3, 1e3, 200, 100, 100, 50};
  for (std::size_t i = 0; i < 7; ++i) {
    const ExperimentRow& r = paper.rows[i];
    CHECK(r.label() == labels[i]);
    CHECK(r.horizon == horizons[i]);
    CHECK(r.delta == deltas[i]);
    CHECK(r.n_paths == 1000);
    CHECK(r.sampling_period == 1.0);
    CHECK(r.params.beta() == 1.0);
    CHECK(r.params.rho() == 1.0);
    CHECK(r.params.gamma() == r.gamma_over_rho->value());
  }
  CHECK_NOTHROW(paper.validate());

  const ExperimentConfig desk = desk_scale_config();
  CHECK(desk.rows[0].n_paths == 200);
  CHECK(desk.rows[0].horizon == 1e5);
  CHECK(desk.rows[1].horizon == 1e4);
  CHECK(desk.rows[1].n_paths == 1000);
  for (std::size_t i = 2; i < 7; ++i) CHECK(desk.rows[i].horizon == paper.rows[i].horizon);

  CHECK(profile_config("paper").profile == "paper");
  CHECK_THROWS_AS(profile_config("laptop"), std::invalid_argument);

  const ExperimentConfig sub = select_rows(paper, {"2/1", "3/4"});
  REQUIRE(sub.rows.size() == 2);
  CHECK(sub.rows[0].label() == "2");
  CHECK(sub.rows[1].label() == "3/4");
  CHECK_THROWS_AS(select_rows(paper, {"7/8"}), std::invalid_argument);
}

TEST_CASE("config validation names the bad row") {
  ExperimentConfig c = paper_config();
  c.rows[3].delta = 2.5;  // not on the grid
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("1"), std::invalid_argument);
  c = paper_config();
  c.rows[0].n_paths = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = paper_config();
  c.rows[2].delta = 3e4;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("config JSON round trip") {
  ExperimentConfig c = desk_scale_config();
  c.base_seed = 99;
  c.format = OutputFormat::Json;
  c.parallel_rows = true;
  c.memory_budget_mb = 64;
  c.fit_windows.msd = FitWindow{20.0, 500.0};
  c.rows[4].fit_windows.velocity = FitWindow{200.0, 2000.0};
  c.rows.push_back(ExperimentRow{std::nullopt, ModelParams(0.5, 1.1, 2.0), 5, 30.0, 3.0, 0.5, {}});
  const ExperimentConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.rows.size() == 8);
  CHECK(back.rows[4].fit_windows.velocity == FitWindow{200.0, 2000.0});
  CHECK(back.rows[7].params.gamma() == 1.1);
  CHECK(back.rows[7].sampling_period == 0.5);
  CHECK(!back.rows[7].gamma_over_rho);

  TempDir dir("config");
  save_config(c, dir / "c.json");
  CHECK(config_to_json(load_config(dir / "c.json")) == config_to_json(c));
}

TEST_CASE("config JSON errors name the key") {
  const std::string good = config_to_json(desk_scale_config());
  nlohmann::json j = nlohmann::json::parse(good);
  auto with = [&](auto edit) {
    nlohmann::json k = j;
    edit(k);
    return key_of_error(k.dump());
  };
  CHECK(with([](nlohmann::json& k) { k["rows"][0]["horizon"] = "big"; }) == "rows[0].horizon");
  CHECK(with([](nlohmann::json& k) { k["rows"][2].erase("n_paths"); }) == "rows[2].n_paths");
  CHECK(with([](nlohmann::json& k) { k["rows"][1]["gamma_over_rho"] = "x/y"; }) == "rows[1].gamma_over_rho");
  CHECK(with([](nlohmann::json& k) { k["version"] = 2; }) == "version");
  CHECK(with([](nlohmann::json& k) { k["format"] = "other"; }) == "format");
  CHECK(with([](nlohmann::json& k) { k["output_format"] = "xml"; }) != "");
  CHECK(key_of_error("{not json") != "");
}

TEST_CASE("results CSV round trip keeps every digit and error markers") {
  ResultsTable t = reference_table();
  t.rows[0].moses = 0.1 + 0.2;
  t.rows[0].seed = 18446744073709551615ULL;
  t.rows[0].wall_time_s = 1.25;
  t.rows[1].error = "fit failed for msd: only 2 usable points";
  const ResultsTable back = results_from_csv(results_to_csv(t));
  REQUIRE(back.rows.size() == t.rows.size());
  CHECK(back.rows[0].moses == 0.1 + 0.2);
  CHECK(back.rows[0].seed == t.rows[0].seed);
  CHECK(back.rows[0].wall_time_s == 1.25);
  CHECK(!back.rows[1].ok());
  CHECK(back.rows[1].error == t.rows[1].error);
  CHECK(results_to_csv(back) == results_to_csv(t));
  CHECK(results_to_csv(t).rfind("# gpp-results v1\n", 0) == 0);
  CHECK(results_to_csv(t, false).find("wall_time") == std::string::npos);
  CHECK(results_to_csv(t).find("wall_time") != std::string::npos);
  CHECK_THROWS_AS(results_from_csv("label,moses\n"), FormatError);
}

TEST_CASE("reference comparison") {
  const ResultsTable ref = reference_table();
  CHECK(ref.find("3/4")->hurst == 0.753);
  CHECK(ref.find("1/4")->moses == -0.151);

  const ComparisonReport self = compare_to_reference(ref, ref, reference_tolerances());
  CHECK(self.pass);
  CHECK(self.cells.size() == 28);

  ResultsTable t = ref;
  t.rows[2].moses += 0.069;  // inside 0.07
  t.rows[0].noah += 0.09;    // relaxed row, inside 0.1
  CHECK(compare_to_reference(t, ref, reference_tolerances()).pass);
  t.rows[2].hurst += 0.06;
  const ComparisonReport r = compare_to_reference(t, ref, reference_tolerances());
  CHECK(!r.pass);
  std::size_t failing = 0;
  for (const CellCheck& c : r.cells)
    if (!c.pass) {
      ++failing;
      CHECK(c.label == "3/4");
      CHECK(c.exponent == "H");
    }
  CHECK(failing == 1);
  CHECK(comparison_to_text(r).find("FAIL") != std::string::npos);

  ResultsTable errored = ref;
  errored.rows[5].error = "boom";
  const ComparisonReport e = compare_to_reference(errored, ref, reference_tolerances());
  CHECK(!e.pass);
  CHECK(e.failed_rows == std::vector<std::string>{"3/2"});

  ResultsTable unknown;
  ResultRow odd;
  odd.label = "7/3";
  odd.gamma_over_rho = 7.0 / 3.0;
  unknown.rows.push_back(odd);
  CHECK_THROWS_AS(compare_to_reference(unknown, ref, reference_tolerances()), std::invalid_argument);
}

TEST_CASE("small experiment run writes every artifact") {
  TempDir dir("run");
  ExperimentConfig c;
  c.rows = {polya_row(200, 1000.0, 50.0)};
  c.output_dir = dir.path();
  c.write_ensembles = true;
  std::size_t callbacks = 0;
  const ResultsTable t = run_experiment(c, {[&](const ExperimentRow&, const ResultRow&) { ++callbacks; }});
  CHECK(callbacks == 1);
  REQUIRE(t.rows.size() == 1);
  const ResultRow& r = t.rows[0];
  REQUIRE(r.ok());
  CHECK(r.hurst == doctest::Approx(1.0).epsilon(0.05));
  CHECK(r.moses == doctest::Approx(0.5).epsilon(0.1));
  CHECK(r.seed == row_seed(c.base_seed, "1"));
  CHECK(r.n_paths == 200);
  for (const char* f : {"results.csv", "summary.json", "row_1/abs_velocity.csv", "row_1/sq_velocity.csv",
                        "row_1/etamsd.csv", "row_1/msd.csv", "row_1/fits.json", "row_1/ensemble.gppe"})
    CHECK_MESSAGE(fs::exists(dir / f), f);
  CHECK(results_from_csv(slurp(dir / "results.csv")).rows[0].hurst == r.hurst);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("format") == "gpp-summary");

  // The stored ensemble reproduces the curves.
  const ExponentReport again =
      estimate_exponents(read_ensemble(dir / "row_1/ensemble.gppe"), EstimationPlan::make_default(1000.0, 1.0, 50.0));
  CHECK(again.hurst == r.hurst);
  CHECK(again.moses == r.moses);
}

TEST_CASE("results do not depend on batching, threads or row scheduling") {
  TempDir dir("repro");
  ExperimentConfig c;
  c.rows = {polya_row(150, 4000.0, 200.0),
            ExperimentRow{Rational(3, 2), ModelParams(1.0, 1.5, 1.0), 60, 300.0, 30.0, 1.0, {}}};
  c.output_dir = dir / "a";
  c.threads = 1;
  const std::string serial = results_to_csv(run_experiment(c), false);
  c.output_dir = dir / "b";
  c.threads = 3;
  c.parallel_rows = true;
  c.memory_budget_mb = 1;  // 65 paths per batch
  CHECK(results_to_csv(run_experiment(c), false) == serial);
  c.output_dir = dir / "c";
  c.rows = {c.rows[1]};
  const ResultsTable only = run_experiment(c);
  CHECK(only.rows[0].hurst == results_from_csv(serial).rows[1].hurst);
}

TEST_CASE("a failing row is marked and the others still run") {
  TempDir dir("errors");
  ExperimentConfig c;
  c.rows = {polya_row(20, 20.0, 10.0), polya_row(50, 200.0, 20.0)};
  c.rows[1].gamma_over_rho = Rational(1, 1);
  c.rows[0].gamma_over_rho.reset();
  c.rows[0].params = ModelParams(1.0, 0.5, 1.0);
  c.output_dir = dir.path();
  const ResultsTable t = run_experiment(c);
  REQUIRE(t.rows.size() == 2);
  CHECK(!t.rows[0].ok());
  CHECK(t.rows[0].error.find("velocity") != std::string::npos);
  CHECK_MESSAGE(t.rows[1].ok(), t.rows[1].error);
  CHECK(slurp(dir / "results.csv").find("error: ") != std::string::npos);

  ExperimentConfig empty;
  empty.output_dir = dir / "empty";
  CHECK(run_experiment(empty).rows.empty());
  CHECK(fs::exists(dir / "empty" / "results.csv"));
}

TEST_CASE("figure data") {
  TempDir dir("fig");
  CHECK(figure_kind_from_string("2") == FigureKind::RegimeDiagram);
  CHECK(figure_kind_from_string("increment_pmf") == FigureKind::IncrementPmf);
  CHECK_THROWS_AS(figure_kind_from_string("9"), std::invalid_argument);

  FigureOptions json_opts;
  json_opts.format = OutputFormat::Json;
  const auto files = emit_figure_data(FigureKind::IncrementPmf, dir.path(), json_opts);
  REQUIRE(files.size() == 1);
  const auto doc = nlohmann::json::parse(slurp(files[0]));
  CHECK(doc.at("format") == "gpp-figure");
  // Every increment law is negative binomial: its excess kurtosis follows
  // from mean and variance alone, approaching 6/r = 6 and 9 for long windows.
  std::map<std::pair<std::string, double>, double> pmf_mass, kurt;
  for (const auto& row : doc.at("rows")) {
    const std::string name = row[0];
    const double ratio = row[2], var = row[8], k = row[9], pmf = row[6];
    pmf_mass[{name, ratio}] += pmf;
    const double mean = 10.0, p = mean / var, r = mean * p / (1.0 - p);
    CHECK(k == doctest::Approx(6.0 / r + p * p / (r * (1.0 - p))).epsilon(1e-6));
    kurt[{name, ratio}] = k;
  }
  CHECK(pmf_mass.size() == 6);
  for (const auto& [key, mass] : pmf_mass) CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(kurt[{"ballistic", 10.0}] == doctest::Approx(6.0).epsilon(0.05));
  CHECK(kurt[{"hyperballistic", 10.0}] == doctest::Approx(9.0).epsilon(0.15));

  const auto ac = emit_figure_data(FigureKind::Autocorrelation, dir.path());
  const std::string text = slurp(ac.at(0));
  CHECK(text.rfind("# gpp-figure v1\n", 0) == 0);
  CHECK(emit_figure_data(FigureKind::RegimeDiagram, dir.path()).size() == 1);

  FigureOptions small;
  small.row = ExperimentRow{Rational(3, 4), ModelParams(1.0, 0.75, 1.0), 50, 2000.0, 100.0, 1.0, {}};
  const auto sc = emit_figure_data(FigureKind::ScalingCurves, dir / "sc", small);
  CHECK(sc.size() == 4);
}
