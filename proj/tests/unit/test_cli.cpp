#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "gpp/ensemble_io.hpp"
#include "gpp/experiment.hpp"
#include "gpp/format.hpp"
#include "support.hpp"

using gpp_test::slurp;
using gpp_test::TempDir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "gppsim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = gppsim::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> simulate_args(const fs::path& file) {
  return {"simulate", "--beta", "1", "--gamma", "1", "--rho", "1", "--horizon", "300", "--paths", "30",
          "--sampling-period", "1", "-o", file.string()};
}

std::size_t count_files(const fs::path& dir) {
  std::size_t n = 0;
  for (auto it = fs::recursive_directory_iterator(dir); it != fs::recursive_directory_iterator(); ++it) ++n;
  return n;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == gppsim::kUsage);
  CHECK(run({"teleport"}).code == gppsim::kUsage);
  CHECK(run({"--help"}).code == gppsim::kOk);
  CHECK(run({"simulate", "--help"}).code == gppsim::kOk);
  CHECK(run({"figures", "--which", "9"}).code == gppsim::kUsage);
  CHECK(run({"pmf", "--kind", "joint", "--beta", "1", "--gamma", "1", "--rho", "1", "--s1", "0", "--t1", "2",
             "--s2", "1", "--t2", "3"})
            .code == gppsim::kUsage);
  CHECK(run({"pmf", "--kind", "transition", "--beta", "-1", "--gamma", "1", "--rho", "1", "--t", "1"}).code ==
        gppsim::kUsage);
}

TEST_CASE("usage errors leave no files behind") {
  TempDir dir("cli-usage");
  auto args = simulate_args(dir / "e.gppe");
  args.erase(args.begin() + 5, args.begin() + 7);  // drop --rho 1
  const Outcome o = run(args);
  CHECK(o.code == gppsim::kUsage);
  CHECK(o.err.find("--rho") != std::string::npos);
  CHECK(count_files(dir.path()) == 0);

  auto bad_h = simulate_args(dir / "e.gppe");
  bad_h[12] = "0";
  CHECK(run(bad_h).code == gppsim::kUsage);
  CHECK(count_files(dir.path()) == 0);
}

TEST_CASE("event cap overflow is a runtime error without a partial file") {
  TempDir dir("cli-cap");
  const Outcome o = run({"simulate", "--beta", "1", "--gamma", "2", "--rho", "1", "--horizon", "1000", "--paths", "4",
                         "--sampling-period", "1", "--event-cap", "500", "-o", (dir / "e.gppe").string()});
  CHECK(o.code == gppsim::kRuntime);
  CHECK(o.err.find("500") != std::string::npos);
  CHECK(count_files(dir.path()) == 0);
}

TEST_CASE("simulate then analyze in both formats") {
  TempDir dir("cli-flow");
  const Outcome sim = run(simulate_args(dir / "e.gppe"));
  REQUIRE(sim.code == gppsim::kOk);
  CHECK(sim.out.find("events_mean") != std::string::npos);
  const gpp::Ensemble e = gpp::read_ensemble(dir / "e.gppe");
  CHECK(e.size() == 30);
  CHECK(e.spec().base_seed == gpp::kDefaultBaseSeed);

  REQUIRE(run({"analyze", "--ensemble", (dir / "e.gppe").string(), "--delta", "30"}).code == gppsim::kOk);
  const Outcome js = run({"analyze", "--ensemble", (dir / "e.gppe").string(), "--delta", "30", "--format", "json",
                          "-o", (dir / "json").string()});
  REQUIRE(js.code == gppsim::kOk);
  for (const char* name : {"abs_velocity", "sq_velocity", "etamsd", "msd"}) {
    CAPTURE(name);
    const auto csv = gpp::read_curve_csv((dir / (std::string("e.") + name + ".csv")).string());
    const auto json = gpp::curve_from_json(slurp(dir / "json" / (std::string("e.") + name + ".json")));
    CHECK(csv.abscissa == json.abscissa);
    CHECK(csv.ordinate == json.ordinate);
    CHECK(csv.std_error == json.std_error);
  }
  CHECK(fs::exists(dir / "e.fits.json"));
  const gpp::ExponentReport direct = gpp::estimate_exponents(e, 30.0);
  CHECK(js.out.find(gpp::format_double(direct.hurst, 4)) != std::string::npos);

  CHECK(run({"analyze", "--ensemble", (dir / "e.gppe").string(), "--delta", "2.5"}).code == gppsim::kUsage);
  CHECK(run({"analyze", "--ensemble", (dir / "nope.gppe").string(), "--delta", "30"}).code == gppsim::kUsage);

  std::string text = slurp(dir / "e.gppe");
  text.replace(text.find("beta 1"), 6, "beta x");
  std::ofstream(dir / "bad.gppe", std::ios::binary) << text;
  const Outcome bad = run({"analyze", "--ensemble", (dir / "bad.gppe").string(), "--delta", "30"});
  CHECK(bad.code == gppsim::kRuntime);
  CHECK(bad.err.find("beta") != std::string::npos);
}

TEST_CASE("pmf output agrees between formats") {
  const std::vector<std::string> base{"pmf", "--kind", "increment", "--beta", "1", "--gamma", "1.5",
                                      "--rho", "1", "--s", "2", "--t", "5", "--range", "0:6"};
  const Outcome csv = run(base);
  auto json_args = base;
  json_args.insert(json_args.end(), {"--format", "json"});
  const Outcome json = run(json_args);
  REQUIRE(csv.code == gppsim::kOk);
  REQUIRE(json.code == gppsim::kOk);
  CHECK(csv.out.rfind("# gpp-pmf v1\n", 0) == 0);
  const gpp::ModelParams p(1.0, 1.5, 1.0);
  const auto values = nlohmann::json::parse(json.out).at("values");
  REQUIRE(values.size() == 7);
  for (std::uint64_t n = 0; n <= 6; ++n) {
    const double expected = gpp::increment_pmf(p, n, 2.0, 5.0);
    CHECK(csv.out.find(std::to_string(n) + "," + gpp::format_double(expected) + "\n") != std::string::npos);
    CHECK(values[n].at("n") == n);
    CHECK(values[n].at("pmf").get<double>() == expected);
  }
}

TEST_CASE("output directory falls back to the environment") {
  TempDir dir("cli-env");
  ::setenv("GPPSIM_OUTPUT_DIR", dir.path().c_str(), 1);
  auto args = simulate_args("x");
  args.resize(args.size() - 2);
  const Outcome o = run(args);
  ::unsetenv("GPPSIM_OUTPUT_DIR");
  CHECK(o.code == gppsim::kOk);
  CHECK(fs::exists(dir / "ensemble.gppe"));
}

TEST_CASE("figures") {
  TempDir dir("cli-fig");
  CHECK(run({"figures", "--which", "2", "--out-dir", dir.path().string()}).code == gppsim::kOk);
  CHECK(fs::exists(dir / "regime_diagram.csv"));
  CHECK(run({"figures", "--which", "autocorrelation", "--format", "json", "-o", dir.path().string()}).code ==
        gppsim::kOk);
  CHECK(fs::exists(dir / "autocorrelation.json"));
}

TEST_CASE("reproduce exit codes") {
  TempDir dir("cli-rep");
  gpp::ExperimentConfig c;
  gpp::ExperimentRow row{gpp::Rational(1, 1), gpp::ModelParams(1.0, 1.0, 1.0), 100, 200.0, 20.0, 0.1, {}};
  // Early-time displacement is far from the asymptotic slope.
  row.fit_windows.msd = gpp::FitWindow{0.1, 0.5};
  c.rows = {row};
  gpp::save_config(c, dir / "early.json");
  const Outcome bad = run({"reproduce", "--config", (dir / "early.json").string(), "--compare", "-o",
                           (dir / "early").string()});
  CHECK(bad.code == gppsim::kComparisonFailed);
  CHECK(slurp(dir / "early" / "comparison.txt").find("FAIL") != std::string::npos);
  CHECK(fs::exists(dir / "early" / "results.csv"));

  c.rows = {gpp::ExperimentRow{gpp::Rational(1, 1), gpp::ModelParams(1.0, 1.0, 1.0), 10, 20.0, 10.0, 1.0, {}}};
  gpp::save_config(c, dir / "tiny.json");
  const Outcome err = run({"reproduce", "--config", (dir / "tiny.json").string(), "-o", (dir / "tiny").string()});
  CHECK(err.code == gppsim::kRuntime);
  CHECK(slurp(dir / "tiny" / "results.csv").find("error: ") != std::string::npos);

  CHECK(run({"reproduce", "--profile", "paper", "--rows", "9/7", "-o", (dir / "x").string()}).code ==
        gppsim::kUsage);
}
