#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gpp/errors.hpp"
#include "gpp/experiment.hpp"
#include "gpp/format.hpp"

namespace gpp {

namespace {

using nlohmann::json;

constexpr const char* kResultsMagic = "# gpp-results v1";
constexpr const char* kColumns =
    "label,gamma_over_rho,moses,noah,joseph,hurst,r2_abs_velocity,r2_sq_velocity,r2_etamsd,r2_msd,"
    "relation_residual,seed,n_paths,horizon,delta,status";

std::string csv_safe(std::string text) {
  for (char& c : text)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return text;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double cell_double(const std::string& text, const char* column) {
  if (text == "NA") return std::nan("");
  try {
    return parse_double(text);
  } catch (const std::invalid_argument&) {
    throw FormatError(column, "not a number: '" + text + "'");
  }
}

}  // namespace

std::string_view to_string(OutputFormat format) noexcept { return format == OutputFormat::Csv ? "csv" : "json"; }

OutputFormat output_format_from_string(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw std::invalid_argument("unknown format '" + std::string(name) + "' (expected csv or json)");
}

const ResultRow* ResultsTable::find(std::string_view label) const {
  for (const ResultRow& r : rows)
    if (r.label == label) return &r;
  return nullptr;
}

std::string results_to_csv(const ResultsTable& table, bool include_wall_time) {
  std::ostringstream out;
  out << kResultsMagic << '\n' << kColumns << (include_wall_time ? ",wall_time_s" : "") << '\n';
  for (const ResultRow& r : table.rows) {
    auto num = [&](double v) { return r.ok() ? format_double(v) : std::string("NA"); };
    out << r.label << ',' << format_double(r.gamma_over_rho) << ',' << num(r.moses) << ',' << num(r.noah) << ','
        << num(r.joseph) << ',' << num(r.hurst) << ',' << num(r.r2_abs_velocity) << ',' << num(r.r2_sq_velocity) << ','
        << num(r.r2_etamsd) << ',' << num(r.r2_msd) << ',' << num(r.relation_residual) << ',' << r.seed << ','
        << r.n_paths << ',' << format_double(r.horizon) << ',' << format_double(r.delta) << ','
        << (r.ok() ? std::string("ok") : "error: " + csv_safe(r.error));
    if (include_wall_time) out << ',' << format_double(r.wall_time_s, 6);
    out << '\n';
  }
  return out.str();
}

std::string results_to_json(const ResultsTable& table, bool include_wall_time) {
  json rows = json::array();
  for (const ResultRow& r : table.rows) {
    json j = {{"label", r.label},
              {"gamma_over_rho", r.gamma_over_rho},
              {"seed", r.seed},
              {"n_paths", r.n_paths},
              {"horizon", r.horizon},
              {"delta", r.delta},
              {"status", r.ok() ? "ok" : "error"}};
    if (r.ok()) {
      j["moses"] = r.moses;
      j["noah"] = r.noah;
      j["joseph"] = r.joseph;
      j["hurst"] = r.hurst;
      j["r2"] = {{"abs_velocity", r.r2_abs_velocity},
                 {"sq_velocity", r.r2_sq_velocity},
                 {"etamsd", r.r2_etamsd},
                 {"msd", r.r2_msd}};
      j["relation_residual"] = r.relation_residual;
    } else {
      j["error"] = r.error;
    }
    if (include_wall_time) j["wall_time_s"] = r.wall_time_s;
    rows.push_back(std::move(j));
  }
  return json{{"format", "gpp-results"}, {"version", 1}, {"rows", rows}}.dump(2) + "\n";
}

ResultsTable results_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kResultsMagic) throw FormatError("format", "not a gpp-results v1 table");
  if (!std::getline(in, line) || line.rfind(kColumns, 0) != 0) throw FormatError("columns", "unexpected column header");
  const bool wall = line.size() > std::string(kColumns).size();
  const std::size_t width = wall ? 17 : 16;
  ResultsTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != width) throw FormatError("row", "expected " + std::to_string(width) + " columns: '" + line + "'");
    ResultRow r;
    r.label = c[0];
    r.gamma_over_rho = cell_double(c[1], "gamma_over_rho");
    r.moses = cell_double(c[2], "moses");
    r.noah = cell_double(c[3], "noah");
    r.joseph = cell_double(c[4], "joseph");
    r.hurst = cell_double(c[5], "hurst");
    r.r2_abs_velocity = cell_double(c[6], "r2_abs_velocity");
    r.r2_sq_velocity = cell_double(c[7], "r2_sq_velocity");
    r.r2_etamsd = cell_double(c[8], "r2_etamsd");
    r.r2_msd = cell_double(c[9], "r2_msd");
    r.relation_residual = cell_double(c[10], "relation_residual");
    try {
      r.seed = std::stoull(c[11]);
      r.n_paths = std::stoull(c[12]);
    } catch (const std::exception&) {
      throw FormatError("seed", "not an integer in '" + line + "'");
    }
    r.horizon = cell_double(c[13], "horizon");
    r.delta = cell_double(c[14], "delta");
    if (c[15] != "ok") {
      if (c[15].rfind("error: ", 0) != 0) throw FormatError("status", "expected ok or error: '" + c[15] + "'");
      r.error = c[15].substr(7);
    }
    if (wall) r.wall_time_s = cell_double(c[16], "wall_time_s");
    table.rows.push_back(std::move(r));
  }
  return table;
}

void write_results(const ResultsTable& table, const std::filesystem::path& file, OutputFormat format) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error("cannot create results file " + file.string());
  out << (format == OutputFormat::Csv ? results_to_csv(table) : results_to_json(table));
  if (!out) throw Error("write to results file failed: " + file.string());
}

ResultsTable reference_table() {
  struct ReferenceRow {
    const char* label;
    double ratio, m, l, j, h;
  };
  constexpr ReferenceRow kRows[] = {
      {"1/4", 0.25, -0.151, 0.674, 0.612, 0.263}, {"1/2", 0.5, 0.046, 0.562, 0.818, 0.505},
      {"3/4", 0.75, 0.268, 0.510, 0.967, 0.753},  {"1", 1.0, 0.499, 0.500, 0.995, 0.999},
      {"5/4", 1.25, 0.741, 0.506, 1.000, 1.241},  {"3/2", 1.5, 0.993, 0.517, 0.999, 1.477},
      {"2", 2.0, 1.539, 0.548, 0.980, 1.904},
  };
  ResultsTable t;
  for (const ReferenceRow& p : kRows) {
    ResultRow r;
    r.label = p.label;
    r.gamma_over_rho = p.ratio;
    r.moses = p.m;
    r.noah = p.l;
    r.joseph = p.j;
    r.hurst = p.h;
    t.rows.push_back(r);
  }
  return t;
}

const ExponentTolerance& Tolerances::for_row(const std::string& label) const {
  const auto it = per_row.find(label);
  return it == per_row.end() ? defaults : it->second;
}

Tolerances reference_tolerances() {
  Tolerances t;
  t.per_row["1/4"] = {0.1, 0.1, 0.1, 0.1};
  t.per_row["1/2"] = {0.1, 0.1, 0.1, 0.1};
  return t;
}

ComparisonReport compare_to_reference(const ResultsTable& table, const ResultsTable& reference,
                                      const Tolerances& tolerances) {
  for (const ResultRow& row : table.rows)
    if (!reference.find(row.label)) throw std::invalid_argument("no reference row for '" + row.label + "'");
  ComparisonReport report;
  for (const ResultRow& row : table.rows) {
    if (!row.ok()) {
      report.failed_rows.push_back(row.label);
      report.pass = false;
      continue;
    }
    const ResultRow& ref = *reference.find(row.label);
    const ExponentTolerance& tol = tolerances.for_row(row.label);
    auto check = [&](const char* name, double value, double expected, double t) {
      const double diff = std::abs(value - expected);
      const bool pass = diff <= t;
      report.cells.push_back({row.label, name, value, expected, diff, t, pass});
      report.pass = report.pass && pass;
    };
    check("M", row.moses, ref.moses, tol.moses);
    check("L", row.noah, ref.noah, tol.noah);
    check("J", row.joseph, ref.joseph, tol.joseph);
    check("H", row.hurst, ref.hurst, tol.hurst);
  }
  return report;
}

std::string comparison_to_text(const ComparisonReport& report) {
  std::ostringstream out;
  for (const CellCheck& c : report.cells)
    out << (c.pass ? "ok   " : "FAIL ") << c.label << ' ' << c.exponent << " = " << format_double(c.value, 4)
        << " (reference " << format_double(c.reference, 4) << ", |diff| " << format_double(c.difference, 3)
        << ", tolerance " << format_double(c.tolerance, 3) << ")\n";
  for (const std::string& label : report.failed_rows) out << "FAIL " << label << " did not complete\n";
  out << (report.pass ? "comparison passed" : "comparison FAILED") << '\n';
  return out.str();
}

}  // namespace gpp
