#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gpp/errors.hpp"
#include "gpp/experiment.hpp"
#include "gpp/format.hpp"
#include "gpp/rng.hpp"

namespace gpp {

namespace {

using nlohmann::json;

struct ReferenceScale {
  const char* ratio;
  double horizon;
  double delta;
};

constexpr ReferenceScale kReferenceScale[] = {
    {"1/4", 1e6, 1e4}, {"1/2", 1e5, 1e3}, {"3/4", 2e4, 1e3}, {"1", 8e3, 200},
    {"5/4", 2e3, 100}, {"3/2", 1e3, 100}, {"2", 200, 50},
};

ExperimentRow ratio_row(const Rational& ratio, std::size_t n_paths, double horizon, double delta, double beta = 1.0) {
  return ExperimentRow{ratio, ModelParams(beta, ratio.value(), 1.0), n_paths, horizon, delta, 1.0, {}};
}

json window_json(const std::optional<FitWindow>& w) { return w ? json{w->lo, w->hi} : json(nullptr); }

json overrides_json(const FitWindowOverrides& o) {
  json j = json::object();
  if (o.velocity) j["velocity"] = window_json(o.velocity);
  if (o.etamsd) j["etamsd"] = window_json(o.etamsd);
  if (o.msd) j["msd"] = window_json(o.msd);
  return j;
}

class Reader {
 public:
  explicit Reader(std::string prefix) : prefix_(std::move(prefix)) {}

  std::string key(const std::string& k) const {
    if (k.empty()) return prefix_;
    return prefix_.empty() ? k : prefix_ + "." + k;
  }

  template <typename T>
  T get(const json& j, const std::string& k) const {
    if (!j.contains(k)) throw FormatError(key(k), "missing");
    try {
      return j.at(k).get<T>();
    } catch (const json::exception&) {
      throw FormatError(key(k), "wrong type");
    }
  }

  template <typename T>
  T get_or(const json& j, const std::string& k, T fallback) const {
    return j.contains(k) ? get<T>(j, k) : fallback;
  }

  double positive(const json& j, const std::string& k) const {
    const double v = get<double>(j, k);
    if (!(v > 0.0) || !std::isfinite(v)) throw FormatError(key(k), "must be positive and finite");
    return v;
  }

  FitWindowOverrides overrides(const json& j, const std::string& k) const {
    FitWindowOverrides o;
    if (!j.contains(k)) return o;
    const json& w = j.at(k);
    if (!w.is_object()) throw FormatError(key(k), "must be an object");
    for (auto it = w.begin(); it != w.end(); ++it) {
      const std::string name = key(k) + "." + it.key();
      std::vector<double> v;
      try {
        v = it.value().get<std::vector<double>>();
      } catch (const json::exception&) {
        throw FormatError(name, "must be [lo, hi]");
      }
      if (v.size() != 2 || !(v[0] > 0.0) || !(v[1] >= v[0])) throw FormatError(name, "must be [lo, hi] with 0 < lo <= hi");
      const FitWindow fw{v[0], v[1]};
      if (it.key() == "velocity") o.velocity = fw;
      else if (it.key() == "etamsd") o.etamsd = fw;
      else if (it.key() == "msd") o.msd = fw;
      else throw FormatError(name, "unknown curve (expected velocity, etamsd or msd)");
    }
    return o;
  }

 private:
  std::string prefix_;
};

ExperimentRow parse_row(const json& j, std::size_t index) {
  const Reader r("rows[" + std::to_string(index) + "]");
  if (!j.is_object()) throw FormatError(r.key(""), "must be an object");
  ExperimentRow row{std::nullopt, ModelParams(1, 1, 1), 0, 0.0, 0.0, 1.0, {}};
  if (j.contains("gamma_over_rho")) {
    if (j.contains("gamma") || j.contains("rho"))
      throw FormatError(r.key("gamma_over_rho"), "give either gamma_over_rho or beta/gamma/rho, not both");
    try {
      row.gamma_over_rho = Rational::parse(r.get<std::string>(j, "gamma_over_rho"));
    } catch (const std::invalid_argument& e) {
      throw FormatError(r.key("gamma_over_rho"), e.what());
    }
    const double beta = j.contains("beta") ? r.positive(j, "beta") : 1.0;
    row.params = ModelParams(beta, row.gamma_over_rho->value(), 1.0);
  } else {
    row.params = ModelParams(r.positive(j, "beta"), r.positive(j, "gamma"), r.positive(j, "rho"));
  }
  const auto n = r.get<std::int64_t>(j, "n_paths");
  if (n < 1) throw FormatError(r.key("n_paths"), "must be >= 1");
  row.n_paths = static_cast<std::size_t>(n);
  row.horizon = r.positive(j, "horizon");
  row.delta = r.positive(j, "delta");
  row.sampling_period = j.contains("sampling_period") ? r.positive(j, "sampling_period") : 1.0;
  row.fit_windows = r.overrides(j, "fit_windows");
  return row;
}

}  // namespace

std::string ExperimentRow::label() const {
  if (gamma_over_rho) return gamma_over_rho->str();
  return format_double(params.hurst(), 6);
}

std::uint64_t row_seed(std::uint64_t base_seed, std::string_view label) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return stream_seed(base_seed, hash);
}

void ExperimentConfig::validate() const {
  if (points_per_curve < 3) throw std::invalid_argument("points_per_curve must be >= 3");
  if (memory_budget_mb == 0) throw std::invalid_argument("memory_budget_mb must be positive");
  std::vector<std::string> seen;
  for (const ExperimentRow& row : rows) {
    const std::string label = row.label();
    try {
      EnsembleSpec{row.params, row.n_paths, row.horizon, row.sampling_period, 0}.validate();
      EstimationPlan plan = EstimationPlan::make_default(row.horizon, row.sampling_period, row.delta, points_per_curve);
      plan.apply(fit_windows);
      plan.apply(row.fit_windows);
      plan.validate(row.horizon, row.sampling_period);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("row " + label + ": " + e.what());
    }
    for (const std::string& s : seen)
      if (s == label) throw std::invalid_argument("row " + label + " appears twice");
    seen.push_back(label);
  }
}

ExperimentConfig paper_config() {
  ExperimentConfig c;
  c.profile = "paper";
  for (const ReferenceScale& s : kReferenceScale) c.rows.push_back(ratio_row(Rational::parse(s.ratio), 1000, s.horizon, s.delta));
  return c;
}

ExperimentConfig desk_scale_config() {
  ExperimentConfig c = paper_config();
  c.profile = "desk-scale";
  for (ExperimentRow& row : c.rows) {
    if (row.gamma_over_rho == Rational(1, 4)) {
      row.n_paths /= 5;
      row.horizon /= 10;
    } else if (row.gamma_over_rho == Rational(1, 2)) {
      row.horizon /= 10;
    }
  }
  return c;
}

ExperimentConfig profile_config(std::string_view name) {
  if (name == "paper") return paper_config();
  if (name == "desk-scale") return desk_scale_config();
  throw std::invalid_argument("unknown profile '" + std::string(name) + "' (expected paper or desk-scale)");
}

ExperimentConfig select_rows(const ExperimentConfig& config, const std::vector<std::string>& labels) {
  ExperimentConfig out = config;
  out.rows.clear();
  for (const std::string& text : labels) {
    std::string wanted;
    try {
      wanted = Rational::parse(text).str();
    } catch (const std::invalid_argument&) {
      wanted = text;
    }
    bool found = false;
    for (const ExperimentRow& row : config.rows) {
      if (row.label() != wanted) continue;
      bool duplicate = false;
      for (const ExperimentRow& kept : out.rows) duplicate = duplicate || kept.label() == wanted;
      if (!duplicate) out.rows.push_back(row);
      found = true;
    }
    if (!found) throw std::invalid_argument("no row labelled '" + text + "' in profile " + config.profile);
  }
  return out;
}

std::string config_to_json(const ExperimentConfig& config) {
  json rows = json::array();
  for (const ExperimentRow& row : config.rows) {
    json r;
    if (row.gamma_over_rho) {
      r["gamma_over_rho"] = row.gamma_over_rho->str();
      r["beta"] = row.params.beta();
    } else {
      r["beta"] = row.params.beta();
      r["gamma"] = row.params.gamma();
      r["rho"] = row.params.rho();
    }
    r["n_paths"] = row.n_paths;
    r["horizon"] = row.horizon;
    r["delta"] = row.delta;
    r["sampling_period"] = row.sampling_period;
    const json o = overrides_json(row.fit_windows);
    if (!o.empty()) r["fit_windows"] = o;
    rows.push_back(std::move(r));
  }
  json j = {{"format", "gpp-experiment"},
            {"version", ExperimentConfig::kVersion},
            {"profile", config.profile},
            {"base_seed", config.base_seed},
            {"output_dir", config.output_dir.string()},
            {"output_format", std::string(to_string(config.format))},
            {"write_ensembles", config.write_ensembles},
            {"parallel_rows", config.parallel_rows},
            {"threads", config.threads},
            {"memory_budget_mb", config.memory_budget_mb},
            {"points_per_curve", config.points_per_curve},
            {"fit_windows", overrides_json(config.fit_windows)},
            {"rows", rows}};
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError("json", e.what());
  }
  const Reader r("");
  if (!j.is_object() || r.get_or<std::string>(j, "format", "") != "gpp-experiment")
    throw FormatError("format", "not a gpp-experiment document");
  if (r.get<int>(j, "version") != ExperimentConfig::kVersion)
    throw FormatError("version", "unsupported version (expected " + std::to_string(ExperimentConfig::kVersion) + ")");
  ExperimentConfig c;
  c.profile = r.get_or<std::string>(j, "profile", "custom");
  c.base_seed = r.get_or<std::uint64_t>(j, "base_seed", c.base_seed);
  c.output_dir = r.get_or<std::string>(j, "output_dir", c.output_dir.string());
  try {
    c.format = output_format_from_string(r.get_or<std::string>(j, "output_format", "csv"));
  } catch (const std::invalid_argument& e) {
    throw FormatError("output_format", e.what());
  }
  c.write_ensembles = r.get_or<bool>(j, "write_ensembles", false);
  c.parallel_rows = r.get_or<bool>(j, "parallel_rows", false);
  c.threads = r.get_or<unsigned>(j, "threads", 0);
  c.memory_budget_mb = r.get_or<std::size_t>(j, "memory_budget_mb", c.memory_budget_mb);
  c.points_per_curve = r.get_or<std::size_t>(j, "points_per_curve", c.points_per_curve);
  c.fit_windows = r.overrides(j, "fit_windows");
  if (!j.contains("rows") || !j.at("rows").is_array()) throw FormatError("rows", "missing or not a list");
  for (std::size_t i = 0; i < j.at("rows").size(); ++i) c.rows.push_back(parse_row(j.at("rows")[i], i));
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError("rows", e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open config file " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return config_from_json(text.str());
}

void save_config(const ExperimentConfig& config, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error("cannot create config file " + file.string());
  out << config_to_json(config);
  if (!out) throw Error("write to config file failed: " + file.string());
}

}  // namespace gpp
