#include "gpp/ensemble_io.hpp"

#include <charconv>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gpp/errors.hpp"
#include "gpp/format.hpp"

namespace gpp {

namespace {

constexpr const char* kMagic = "gpp-ensemble";
constexpr const char* kEventsMagic = "gpp-events";

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

std::uint64_t get_u64(const unsigned char* b) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

void write_header(std::ostream& out, const EnsembleSpec& spec) {
  out << kMagic << ' ' << kEnsembleFormatVersion << '\n'
      << "beta " << format_double(spec.params.beta()) << '\n'
      << "gamma " << format_double(spec.params.gamma()) << '\n'
      << "rho " << format_double(spec.params.rho()) << '\n'
      << "n_paths " << spec.n_paths << '\n'
      << "horizon " << format_double(spec.horizon) << '\n'
      << "sampling_period " << format_double(spec.sampling_period) << '\n'
      << "base_seed " << spec.base_seed << '\n'
      << "event_cap " << spec.event_cap << '\n'
      << "grid_size " << spec.grid_size() << '\n'
      << "encoding u32le\n"
      << "end_header\n";
}

class HeaderParser {
 public:
  explicit HeaderParser(std::istream& in) : in_(in) {}

  std::string value(const std::string& key) {
    std::string line;
    if (!std::getline(in_, line)) throw FormatError(key, "missing (file ends inside the header)");
    const auto space = line.find(' ');
    const std::string found = line.substr(0, space);
    if (found != key) throw FormatError(key, "expected key '" + key + "', found '" + found + "'");
    if (space == std::string::npos || space + 1 >= line.size()) throw FormatError(key, "missing value");
    return line.substr(space + 1);
  }

  double real(const std::string& key) {
    const std::string text = value(key);
    try {
      return parse_double(text);
    } catch (const std::invalid_argument&) {
      throw FormatError(key, "not a number: '" + text + "'");
    }
  }

  std::uint64_t integer(const std::string& key) {
    const std::string text = value(key);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      throw FormatError(key, "not a nonnegative integer: '" + text + "'");
    return out;
  }

  void expect_line(const std::string& key, const std::string& expected) {
    std::string line;
    if (!std::getline(in_, line) || line != expected)
      throw FormatError(key, "expected '" + expected + "'");
  }

 private:
  std::istream& in_;
};

EnsembleSpec parse_header(std::istream& in, std::size_t& grid_size) {
  HeaderParser p(in);
  {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("format", "empty file");
    if (line.rfind(kMagic, 0) != 0) throw FormatError("format", "not a gpp-ensemble file");
    if (line != std::string(kMagic) + " " + std::to_string(kEnsembleFormatVersion))
      throw FormatError("format_version", "unsupported version line '" + line + "'");
  }
  const double beta = p.real("beta");
  const double gamma = p.real("gamma");
  const double rho = p.real("rho");
  const std::uint64_t n_paths = p.integer("n_paths");
  const double horizon = p.real("horizon");
  const double h = p.real("sampling_period");
  const std::uint64_t seed = p.integer("base_seed");
  const std::uint64_t cap = p.integer("event_cap");
  grid_size = p.integer("grid_size");
  p.expect_line("encoding", "encoding u32le");
  p.expect_line("end_header", "end_header");

  auto checked_params = [&]() {
    try {
      return ModelParams(beta, gamma, rho);
    } catch (const std::invalid_argument& e) {
      const std::string field = !(beta > 0.0) ? "beta" : !(gamma > 0.0) ? "gamma" : "rho";
      throw FormatError(field, e.what());
    }
  };
  EnsembleSpec spec{checked_params(), static_cast<std::size_t>(n_paths), horizon, h, seed, cap};
  if (n_paths < 1) throw FormatError("n_paths", "must be >= 1");
  if (!(h > 0.0)) throw FormatError("sampling_period", "must be > 0");
  if (!(horizon >= h)) throw FormatError("horizon", "must be >= sampling_period");
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError("event_cap", e.what());
  }
  if (grid_size != spec.grid_size())
    throw FormatError("grid_size", "does not equal floor(horizon / sampling_period) + 1");
  return spec;
}

std::ifstream open_input(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open ensemble file " + file.string());
  return in;
}

}  // namespace

EnsembleWriter::EnsembleWriter(const std::filesystem::path& file, const EnsembleSpec& spec)
    : spec_(spec), grid_size_(spec.grid_size()) {
  spec_.validate();
  out_.open(file, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error("cannot create ensemble file " + file.string());
  write_header(out_, spec_);
}

void EnsembleWriter::append(std::span<const std::uint32_t> counts, std::uint64_t event_total) {
  if (written_ >= spec_.n_paths) throw std::logic_error("more paths appended than the spec declares");
  if (counts.size() != grid_size_) throw std::invalid_argument("path length does not match the grid");
  put_u64(out_, event_total);
  for (std::uint32_t c : counts) put_u32(out_, c);
  ++written_;
}

void EnsembleWriter::close() {
  if (written_ != spec_.n_paths) throw std::logic_error("ensemble file closed before every path was written");
  out_.flush();
  if (!out_) throw Error("write to ensemble file failed");
  out_.close();
}

void write_ensemble(const Ensemble& ensemble, const std::filesystem::path& file) {
  EnsembleWriter writer(file, ensemble.spec());
  for (std::size_t i = 0; i < ensemble.size(); ++i) writer.append(ensemble.path(i).counts, ensemble.event_total(i));
  writer.close();
}

EnsembleReader::EnsembleReader(const std::filesystem::path& file)
    : in_(open_input(file)), spec_(parse_header(in_, grid_size_)) {}

bool EnsembleReader::next(std::vector<std::uint32_t>& counts, std::uint64_t& event_total) {
  if (read_ == spec_.n_paths) return false;
  std::vector<unsigned char> buf(8 + 4 * grid_size_);
  in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in_.gcount() != static_cast<std::streamsize>(buf.size()))
    throw FormatError("data", "truncated at path " + std::to_string(read_));
  event_total = get_u64(buf.data());
  counts.resize(grid_size_);
  for (std::size_t k = 0; k < grid_size_; ++k) {
    const unsigned char* b = buf.data() + 8 + 4 * k;
    counts[k] = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  ++read_;
  return true;
}

EnsembleSpec read_ensemble_header(const std::filesystem::path& file) {
  auto in = open_input(file);
  std::size_t grid = 0;
  return parse_header(in, grid);
}

Ensemble read_ensemble(const std::filesystem::path& file) {
  EnsembleReader reader(file);
  const EnsembleSpec spec = reader.spec();
  std::vector<std::uint32_t> all;
  all.reserve(spec.n_paths * reader.grid_size());
  std::vector<std::uint64_t> totals;
  std::vector<std::uint32_t> row;
  std::uint64_t total = 0;
  while (reader.next(row, total)) {
    all.insert(all.end(), row.begin(), row.end());
    totals.push_back(total);
  }
  return Ensemble(spec, std::move(all), std::move(totals));
}

void write_event_times(std::span<const Trajectory> trajectories, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error("cannot create event-times file " + file.string());
  out << kEventsMagic << ' ' << kEnsembleFormatVersion << '\n';
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const Trajectory& tr = trajectories[i];
    out << i << ' ' << tr.seed << ' ' << tr.event_times.size();
    for (double t : tr.event_times) out << ' ' << format_double(t);
    out << '\n';
  }
  if (!out) throw Error("write to event-times file failed");
}

std::vector<std::vector<double>> read_event_times(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open event-times file " + file.string());
  std::string line;
  if (!std::getline(in, line) || line != std::string(kEventsMagic) + " " + std::to_string(kEnsembleFormatVersion))
    throw FormatError("format", "not a gpp-events version 1 file");
  std::vector<std::vector<double>> out;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::size_t index = 0, count = 0;
    std::uint64_t seed = 0;
    if (!(row >> index >> seed >> count) || index != out.size())
      throw FormatError("path", "malformed record " + std::to_string(out.size()));
    std::vector<double> times(count);
    for (double& t : times) {
      std::string tok;
      if (!(row >> tok)) throw FormatError("event_times", "short record " + std::to_string(index));
      t = parse_double(tok);
    }
    out.push_back(std::move(times));
  }
  return out;
}

}  // namespace gpp
