#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gpp/errors.hpp"
#include "gpp/estimation.hpp"
#include "gpp/format.hpp"

namespace gpp {

namespace {

using nlohmann::json;

constexpr const char* kCurveMagic = "# gpp-curve v1";
constexpr const char* kColumns = "abscissa,ordinate,n_paths,std_error";

json fit_json(const FitResult& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"r_squared", f.r_squared},
          {"window", {f.window.lo, f.window.hi}},
          {"n_points", f.n_points},
          {"n_zero_excluded", f.n_zero_excluded}};
}

std::string expect_prefixed(std::istream& in, const std::string& prefix, const char* field) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(prefix, 0) != 0) throw FormatError(field, "expected '" + prefix + "'");
  return line.substr(prefix.size());
}

}  // namespace

void write_curve_csv(const ScalingCurve& curve, const std::string& path) {
  curve.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot create curve file " + path);
  out << kCurveMagic << '\n'
      << "# observable " << to_string(curve.kind) << '\n'
      << "# n_paths " << curve.n_paths << '\n'
      << kColumns << '\n';
  for (std::size_t i = 0; i < curve.size(); ++i)
    out << format_double(curve.abscissa[i]) << ',' << format_double(curve.ordinate[i]) << ',' << curve.n_paths << ','
        << format_double(curve.std_error[i]) << '\n';
  if (!out) throw Error("write to curve file failed: " + path);
}

ScalingCurve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open curve file " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCurveMagic) throw FormatError("format", "not a gpp-curve v1 file");
  ScalingCurve curve{};
  try {
    curve.kind = observable_from_string(expect_prefixed(in, "# observable ", "observable"));
  } catch (const std::invalid_argument& e) {
    throw FormatError("observable", e.what());
  }
  const std::string n_text = expect_prefixed(in, "# n_paths ", "n_paths");
  try {
    curve.n_paths = std::stoull(n_text);
  } catch (const std::exception&) {
    throw FormatError("n_paths", "not an integer: '" + n_text + "'");
  }
  if (!std::getline(in, line) || line != kColumns) throw FormatError("columns", "expected '" + std::string(kColumns) + "'");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string x, y, n, se;
    if (!std::getline(row, x, ',') || !std::getline(row, y, ',') || !std::getline(row, n, ',') ||
        !std::getline(row, se))
      throw FormatError("row", "expected four columns: '" + line + "'");
    try {
      curve.abscissa.push_back(parse_double(x));
      curve.ordinate.push_back(parse_double(y));
      curve.std_error.push_back(parse_double(se));
    } catch (const std::invalid_argument&) {
      throw FormatError("row", "not numeric: '" + line + "'");
    }
  }
  try {
    curve.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError("row", e.what());
  }
  return curve;
}

std::string curve_to_json(const ScalingCurve& curve) {
  curve.validate();
  json j = {{"format", "gpp-curve"},
            {"version", 1},
            {"observable", std::string(to_string(curve.kind))},
            {"n_paths", curve.n_paths},
            {"abscissa", curve.abscissa},
            {"ordinate", curve.ordinate},
            {"std_error", curve.std_error}};
  return j.dump(2);
}

ScalingCurve curve_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError("json", e.what());
  }
  if (j.value("format", "") != "gpp-curve" || j.value("version", 0) != 1)
    throw FormatError("format", "not a gpp-curve version 1 document");
  ScalingCurve curve{};
  try {
    curve.kind = observable_from_string(j.at("observable").get<std::string>());
    curve.n_paths = j.at("n_paths").get<std::size_t>();
    curve.abscissa = j.at("abscissa").get<std::vector<double>>();
    curve.ordinate = j.at("ordinate").get<std::vector<double>>();
    curve.std_error = j.at("std_error").get<std::vector<double>>();
    curve.validate();
  } catch (const json::exception& e) {
    throw FormatError("json", e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError("curve", e.what());
  }
  return curve;
}

std::string report_to_json(const ExponentReport& report, int indent) {
  json j = {{"moses", report.moses},
            {"noah", report.noah},
            {"joseph", report.joseph},
            {"hurst", report.hurst},
            {"relation_residual", report.relation_residual},
            {"relation_flagged", report.relation_flagged()},
            {"fits",
             {{"abs_velocity", fit_json(report.abs_velocity_fit)},
              {"sq_velocity", fit_json(report.sq_velocity_fit)},
              {"etamsd", fit_json(report.etamsd_fit)},
              {"msd", fit_json(report.msd_fit)}}}};
  return j.dump(indent);
}

}  // namespace gpp
