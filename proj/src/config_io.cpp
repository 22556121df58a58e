#include "decolab/config_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "decolab/errors.hpp"

namespace decolab {

namespace {

struct Entry {
  std::string value;
  std::size_t line;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::vector<std::string_view>& known_keys() {
  static const std::vector<std::string_view> keys = {
      "quanton.mass_kg", "quanton.lambda_m", "slits.n",       "slits.spacing_m", "slits.width_m",
      "amplitudes.c",    "amplitudes.theta", "detector.mode", "detector.matrix", "env.gamma_per_s",
      "env.T_K",         "screen.L_m",       "screen.xmin_m", "screen.xmax_m",   "screen.points"};
  return keys;
}

double parse_number(std::string_view text, const std::string& key, std::size_t line) {
  const auto t = trim(text);
  double v = 0.0;
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || t.empty()) {
    if (t.find_first_of("ij") != std::string_view::npos && key == "detector.matrix") {
      throw ConfigError(key, line, "line " + std::to_string(line) + ": " + key +
                                       ": complex overlaps are not supported; fold phases into amplitudes.theta");
    }
    throw ConfigError(key, line, "line " + std::to_string(line) + ": " + key + ": cannot parse number '" +
                                     std::string(t) + "'");
  }
  if (!std::isfinite(v)) {
    throw ConfigError(key, line, "line " + std::to_string(line) + ": " + key + ": value must be finite");
  }
  return v;
}

std::vector<double> parse_list(std::string_view text, const std::string& key, std::size_t line) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    out.push_back(parse_number(item, key, line));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

class Entries {
public:
  explicit Entries(std::map<std::string, Entry> e) : entries_(std::move(e)) {}

  const Entry* find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  const Entry& require(const std::string& key) const {
    if (const Entry* e = find(key)) return *e;
    throw ConfigError(key, 0, "missing required key " + key);
  }

  double number(const std::string& key) const {
    const Entry& e = require(key);
    return parse_number(e.value, key, e.line);
  }

  std::optional<double> optional_number(const std::string& key) const {
    if (const Entry* e = find(key)) return parse_number(e->value, key, e->line);
    return std::nullopt;
  }

  long integer(const std::string& key) const {
    const Entry& e = require(key);
    const double v = parse_number(e.value, key, e.line);
    if (v != std::floor(v)) {
      throw ConfigError(key, e.line, "line " + std::to_string(e.line) + ": " + key + " must be an integer");
    }
    return static_cast<long>(v);
  }

private:
  std::map<std::string, Entry> entries_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename Range>
std::string join(const Range& values) {
  std::string s;
  for (const double v : values) {
    if (!s.empty()) s += ",";
    s += fmt(v);
  }
  return s;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> raw;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", line_no, "line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(key, line_no, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (raw.count(key)) {
      throw ConfigError(key, line_no, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    raw.emplace(key, Entry{value, line_no});
  }
  const Entries in(std::move(raw));

  ExperimentConfig cfg;
  cfg.quanton.mass_kg = in.number("quanton.mass_kg");
  cfg.quanton.wavelength_m = in.number("quanton.lambda_m");
  const long n = in.integer("slits.n");
  if (n < 1 || n > 4096) throw ConfigError("slits.n", in.require("slits.n").line, "slits.n must be in [1, 4096]");
  cfg.slits.count = static_cast<int>(n);
  cfg.slits.spacing_m = in.number("slits.spacing_m");
  cfg.slits.width_m = in.number("slits.width_m");

  if (const Entry* c = in.find("amplitudes.c"); c != nullptr && c->value != "equal") {
    cfg.amplitudes.magnitudes = parse_list(c->value, "amplitudes.c", c->line);
    cfg.amplitudes.phases.assign(cfg.amplitudes.magnitudes.size(), 0.0);
  } else {
    cfg.amplitudes = SourceAmplitudes::equal(cfg.slits.count);
  }
  if (const Entry* th = in.find("amplitudes.theta")) {
    cfg.amplitudes.phases = parse_list(th->value, "amplitudes.theta", th->line);
  }

  DetectorMode mode = DetectorMode::parallel;
  if (const Entry* m = in.find("detector.mode")) {
    try {
      mode = parse_detector_mode(m->value);
    } catch (const InvalidParameter& e) {
      throw ConfigError("detector.mode", m->line, "line " + std::to_string(m->line) + ": " + e.what());
    }
  }
  const int nn = cfg.slits.count;
  switch (mode) {
    case DetectorMode::parallel: cfg.detector = DetectorOverlaps::parallel(nn); break;
    case DetectorMode::orthogonal: cfg.detector = DetectorOverlaps::orthogonal(nn); break;
    case DetectorMode::matrix: {
      const Entry& e = in.require("detector.matrix");
      const auto values = parse_list(e.value, "detector.matrix", e.line);
      if (values.size() != static_cast<std::size_t>(nn) * static_cast<std::size_t>(nn)) {
        throw ConfigError("detector.matrix", e.line,
                          "line " + std::to_string(e.line) + ": detector.matrix needs n*n = " +
                              std::to_string(nn * nn) + " entries, got " + std::to_string(values.size()));
      }
      Eigen::MatrixXd O(nn, nn);
      for (int j = 0; j < nn; ++j)
        for (int k = 0; k < nn; ++k) O(j, k) = values[static_cast<std::size_t>(j * nn + k)];
      cfg.detector = DetectorOverlaps::from_matrix(std::move(O));
      break;
    }
  }

  cfg.environment.gamma_per_s = in.optional_number("env.gamma_per_s").value_or(0.0);
  cfg.environment.temperature_K = in.optional_number("env.T_K").value_or(0.0);

  cfg.screen.distance_m = in.number("screen.L_m");
  cfg.screen.x_min_m = in.number("screen.xmin_m");
  cfg.screen.x_max_m = in.number("screen.xmax_m");
  const long pts = in.integer("screen.points");
  if (pts < 0) throw ConfigError("screen.points", in.require("screen.points").line, "screen.points must be >= 2");
  cfg.screen.points = static_cast<std::size_t>(pts);

  const auto report = validate(cfg);
  for (const auto& v : report.violations) {
    if (v.severity != Severity::error || v.far_field_only) continue;
    const Entry* e = in.find(v.field);
    throw ConfigError(v.field, e ? e->line : 0, v.field + ": " + v.message);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "quanton.mass_kg = " << fmt(cfg.quanton.mass_kg) << "\n";
  os << "quanton.lambda_m = " << fmt(cfg.quanton.wavelength_m) << "\n";
  os << "slits.n = " << cfg.slits.count << "\n";
  os << "slits.spacing_m = " << fmt(cfg.slits.spacing_m) << "\n";
  os << "slits.width_m = " << fmt(cfg.slits.width_m) << "\n";
  os << "amplitudes.c = " << join(cfg.amplitudes.magnitudes) << "\n";
  os << "amplitudes.theta = " << join(cfg.amplitudes.phases) << "\n";
  os << "detector.mode = " << to_string(cfg.detector.mode) << "\n";
  if (cfg.detector.mode == DetectorMode::matrix) {
    std::vector<double> flat;
    const auto& O = cfg.detector.overlaps;
    for (int j = 0; j < O.rows(); ++j)
      for (int k = 0; k < O.cols(); ++k) flat.push_back(O(j, k));
    os << "detector.matrix = " << join(flat) << "\n";
  }
  os << "env.gamma_per_s = " << fmt(cfg.environment.gamma_per_s) << "\n";
  os << "env.T_K = " << fmt(cfg.environment.temperature_K) << "\n";
  os << "screen.L_m = " << fmt(cfg.screen.distance_m) << "\n";
  os << "screen.xmin_m = " << fmt(cfg.screen.x_min_m) << "\n";
  os << "screen.xmax_m = " << fmt(cfg.screen.x_max_m) << "\n";
  os << "screen.points = " << cfg.screen.points << "\n";
  return os.str();
}

}  // namespace decolab
