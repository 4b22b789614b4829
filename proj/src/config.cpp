#include "qcomb/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace qcomb::config {

namespace {

const std::vector<std::pair<Scenario, std::string>> kScenarioNames = {
    {Scenario::pairs_fig2, "pairs_fig2"},         {Scenario::matrix_fig2b, "matrix_fig2b"},
    {Scenario::car_sweep_fig3, "car_sweep_fig3"}, {Scenario::hbt_fig4a, "hbt_fig4a"},
    {Scenario::heralded_fig4b, "heralded_fig4b"}, {Scenario::fourport_fig5, "fourport_fig5"},
    {Scenario::custom, "custom"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Unit scales below one are applied by dividing by their exact reciprocal, so
// "25" microseconds becomes the same double as the literal 25e-6.
double to_si(double v, double scale) { return scale < 1 ? v / std::round(1 / scale) : v * scale; }
double from_si(double v, double scale) { return scale < 1 ? v * std::round(1 / scale) : v / scale; }

std::string shortest(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

// Fewest significant digits that still reload to exactly v.
std::string fmt(double v, double scale = 1.0) {
  char buf[40];
  for (int p = 1; p < 17; ++p) {
    const auto r = std::to_chars(buf, buf + sizeof buf, from_si(v, scale), std::chars_format::general, p);
    double back = 0;
    std::from_chars(buf, r.ptr, back);
    if (to_si(back, scale) == v) return shortest(back);
  }
  return shortest(from_si(v, scale));
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected a number, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const auto d = std::stoull(v, &used, 0);
    if (used != v.size() || v.starts_with("-")) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected an unsigned integer, got '" + v + "'");
  }
}

int parse_int(const std::string& v, int line) {
  const double d = parse_double(v, line);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(line, "expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

std::vector<double> parse_list(const std::string& v, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(item, line));
  }
  return out;
}

std::string fmt_list(const std::vector<double>& v, double scale) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i], scale);
  return s;
}

struct Field {
  std::function<void(const std::string&, int)> set;
  std::function<std::string()> get;
};

using Section = std::vector<std::pair<std::string, Field>>;

Field scaled(double& target, double scale) {
  return {[&target, scale](const std::string& v, int line) { target = to_si(parse_double(v, line), scale); },
          [&target, scale] { return fmt(target, scale); }};
}

Section detector_fields(detector::DetectorSpec& d) {
  return {
      {"quantum_efficiency", scaled(d.quantum_efficiency, 1.0)},
      {"dead_time_us", scaled(d.dead_time, 1e-6)},
      {"dark_rate_hz", scaled(d.dark_rate, 1.0)},
      {"jitter_sigma_ps", scaled(d.jitter_sigma, 1e-12)},
      {"mode",
       {[&d](const std::string& v, int line) {
          if (v == "free_running")
            d.mode = detector::Mode::free_running;
          else if (v == "gated")
            d.mode = detector::Mode::gated;
          else
            throw ConfigError(line, "mode must be free_running or gated");
        },
        [&d] { return std::string(d.mode == detector::Mode::gated ? "gated" : "free_running"); }}},
      {"gate_length_ns", scaled(d.gate_length, 1e-9)},
      {"gate_offset_ns", scaled(d.gate_offset, 1e-9)},
      {"tick_ps", scaled(d.tick, 1e-12)},
  };
}

// Section table bound to one config object.
std::vector<std::pair<std::string, Section>> schema(ExperimentConfig& c) {
  auto& r = c.ring;
  auto& s = c.source;
  auto& a = c.analysis;
  std::vector<std::pair<std::string, Section>> out;
  out.push_back({"ring",
                 {
                     {"pump_wavelength_nm", scaled(r.pump_wavelength, 1e-9)},
                     {"q_factor", scaled(r.q_factor, 1.0)},
                     {"linewidth_mhz", scaled(r.linewidth, 1e6)},
                     {"fsr_ghz", scaled(r.fsr, 1e9)},
                     {"radius_um", scaled(r.radius, 1e-6)},
                     {"group_index", scaled(r.group_index, 1.0)},
                     {"enhancement", scaled(r.enhancement, 1.0)},
                     {"thermal_coeff_ghz_per_c", scaled(r.thermal_coeff, 1e9)},
                 }});
  out.push_back({"grid",
                 {
                     {"pump_channel",
                      {[&c](const std::string& v, int line) {
                         const std::string digits = (!v.empty() && (v[0] == 'H' || v[0] == 'h')) ? v.substr(1) : v;
                         c.grid.pump_channel = parse_int(digits, line);
                       },
                       [&c] { return "H" + std::to_string(c.grid.pump_channel); }}},
                     {"spacing_ghz", scaled(c.grid.spacing, 1e9)},
                     {"n_pairs",
                      {[&c](const std::string& v, int line) { c.grid.n_pairs = parse_int(v, line); },
                       [&c] { return std::to_string(c.grid.n_pairs); }}},
                 }});
  out.push_back({"source",
                 {
                     {"linewidth_mhz", scaled(s.linewidth, 1e6)},
                     {"rate_coefficient_hz_per_w2", scaled(s.rate_coefficient, 1.0)},
                     {"pump_power_mw", scaled(s.pump_power, 1e-3)},
                     {"mode_weights",
                      {[&s](const std::string& v, int line) { s.mode_weights = parse_list(v, line); },
                       [&s] { return fmt_list(s.mode_weights, 1.0); }}},
                     {"statistics",
                      {[&s](const std::string& v, int line) {
                         if (v == "thermal")
                           s.statistics = source::Statistics::thermal;
                         else if (v == "poissonian")
                           s.statistics = source::Statistics::poissonian;
                         else
                           throw ConfigError(line, "statistics must be thermal or poissonian");
                       },
                       [&s] {
                         return std::string(s.statistics == source::Statistics::thermal ? "thermal" : "poissonian");
                       }}},
                     {"port_split", scaled(s.port_split, 1.0)},
                 }});
  out.push_back({"detector.signal", detector_fields(c.det_signal)});
  out.push_back({"detector.idler", detector_fields(c.det_idler)});
  out.push_back({"detector.herald_a", detector_fields(c.det_herald_a)});
  out.push_back({"detector.herald_b", detector_fields(c.det_herald_b)});
  out.push_back({"analysis",
                 {
                     {"bin_ticks",
                      {[&a](const std::string& v, int line) { a.bin_ticks = parse_int(v, line); },
                       [&a] { return std::to_string(a.bin_ticks); }}},
                     {"range_ns", scaled(a.range, 1e-9)},
                     {"far_offset_ns", scaled(a.far_offset, 1e-9)},
                     {"fit_half_width_ns", scaled(a.fit_half_width, 1e-9)},
                     {"herald_window_ns", scaled(a.herald_window, 1e-9)},
                     {"matrix_window_ns", scaled(a.matrix_window, 1e-9)},
                 }});
  out.push_back({"sweep",
                 {
                     {"powers_mw",
                      {[&c](const std::string& v, int line) {
                         c.sweep.powers = parse_list(v, line);
                         for (double& p : c.sweep.powers) p = to_si(p, 1e-3);
                       },
                       [&c] { return fmt_list(c.sweep.powers, 1e-3); }}},
                     {"max_events", scaled(c.sweep.max_events, 1.0)},
                 }});
  out.push_back({"experiment",
                 {
                     {"scenario",
                      {[&c](const std::string& v, int line) {
                         try {
                           c.scenario = scenario_from_string(v);
                         } catch (const std::invalid_argument& e) {
                           throw ConfigError(line, e.what());
                         }
                       },
                       [&c] { return to_string(c.scenario); }}},
                     {"duration_s",
                      {[&c](const std::string& v, int line) { c.duration = parse_double(v, line); },
                       [&c] { return c.duration ? fmt(*c.duration) : std::string(); }}},
                     {"seed",
                      {[&c](const std::string& v, int line) { c.seed = parse_u64(v, line); },
                       [&c] { return c.seed ? std::to_string(*c.seed) : std::string(); }}},
                     {"output_dir",
                      {[&c](const std::string& v, int) { c.output_dir = v; },
                       [&c] { return c.output_dir.string(); }}},
                     {"channel_pair",
                      {[&c](const std::string& v, int line) { c.channel_pair = parse_int(v, line); },
                       [&c] { return std::to_string(c.channel_pair); }}},
                     {"hbt_pump_power_mw", scaled(c.hbt_pump_power, 1e-3)},
                     {"hbt_ratio", scaled(c.hbt_ratio, 1.0)},
                 }});
  return out;
}

const std::vector<std::pair<std::string, detector::OpticalPath ExperimentConfig::*>> kPathSections = {
    {"path.signal", &ExperimentConfig::path_signal},
    {"path.idler", &ExperimentConfig::path_idler},
    {"path.source_side", &ExperimentConfig::path_source_side},
};

bool close(double a, double b) { return a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

std::string to_string(Scenario s) {
  for (const auto& [k, v] : kScenarioNames)
    if (k == s) return v;
  return "custom";
}

Scenario scenario_from_string(const std::string& s) {
  for (const auto& [k, v] : kScenarioNames)
    if (v == s) return k;
  throw std::invalid_argument("unknown scenario '" + s + "'");
}

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

ExperimentConfig::ExperimentConfig() {
  // Detection: id210 free-running, 5% efficiency, 25 us dead time, dark 1.3 / 3.4 kHz.
  det_signal.dark_rate = 1.3e3;
  det_idler.dark_rate = 3.4e3;
  // Heralded measurement: idler detectors triggered by the signal detector, 20 ns and 100 ns gates.
  det_herald_a = det_idler;
  det_herald_a.mode = detector::Mode::gated;
  det_herald_a.gate_length = 20e-9;
  det_herald_a.gate_offset = -10e-9;
  det_herald_b = det_herald_a;
  det_herald_b.gate_length = 100e-9;
  det_herald_b.gate_offset = -50e-9;
  // R(30 mW) = 300 kHz per channel at the drop port.
  source.pump_power = 30e-3;
  source.rate_coefficient = 3.0e5 / (30e-3 * 30e-3);
  source.pair_rate_per_channel = pair_rate(source.pump_power);
}

double ExperimentConfig::pair_rate(double power) const { return source::rate_from_power(source.rate_coefficient, power); }

double ExperimentConfig::scenario_duration() const {
  if (duration) return *duration;
  switch (scenario) {
    case Scenario::pairs_fig2:
    case Scenario::matrix_fig2b:
    case Scenario::car_sweep_fig3:
      return 60.0;
    case Scenario::hbt_fig4a:
      return 0.2;
    case Scenario::heralded_fig4b:
      return 600.0;
    case Scenario::fourport_fig5:
      return 10.0;
    case Scenario::custom:
      return 1.0;
  }
  return 1.0;
}

ring::ChannelGrid ExperimentConfig::channel_grid() const {
  return ring::build_channel_grid(ring::ItuChannel{grid.pump_channel}, grid.spacing, grid.n_pairs);
}

void ExperimentConfig::validate() const {
  auto wrap = [](auto&& f) {
    try {
      f();
    } catch (const std::domain_error& e) {
      throw ConfigError(0, e.what());
    }
  };
  if (!seed) throw ConfigError(0, "experiment.seed is required");
  wrap([&] { ring.validate(); });
  wrap([&] {
    auto s = source;
    s.pair_rate_per_channel = pair_rate(s.pump_power);
    s.validate();
  });
  wrap([&] {
    path_signal.validate();
    path_idler.validate();
    path_source_side.validate();
    det_signal.validate();
    det_idler.validate();
    det_herald_a.validate();
    det_herald_b.validate();
  });
  if (det_signal.tick != det_idler.tick || det_signal.tick != det_herald_a.tick || det_signal.tick != det_herald_b.tick)
    throw ConfigError(0, "all detectors must share one TDC tick");
  if (grid.n_pairs < 0) throw ConfigError(0, "grid.n_pairs must be non-negative");
  if (channel_pair < 1 || channel_pair > grid.n_pairs)
    throw ConfigError(0, "experiment.channel_pair must name a grid pair (1.." + std::to_string(grid.n_pairs) + ")");
  if (analysis.bin_ticks < 1 || analysis.bin_ticks % 2 == 0) throw ConfigError(0, "analysis.bin_ticks must be odd");
  if (!(analysis.range > analysis.far_offset)) throw ConfigError(0, "analysis.range must exceed far_offset");
  if (!(analysis.herald_window > 0)) throw ConfigError(0, "analysis.herald_window_ns must be positive");
  if (duration && !(*duration >= 0)) throw ConfigError(0, "experiment.duration_s must be non-negative");
  if (scenario == Scenario::car_sweep_fig3 && sweep.powers.size() < 2)
    throw ConfigError(0, "sweep.powers_mw needs at least two points");
  if (!(hbt_ratio >= 0 && hbt_ratio <= 1)) throw ConfigError(0, "experiment.hbt_ratio must lie in [0, 1]");
  wrap([&] { channel_grid(); });
}

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
  // Compare through the canonical text form; numbers are equal to 1e-12 relative.
  auto a = serialize_config(*this), b = serialize_config(other);
  if (a == b) return true;
  std::istringstream sa(a), sb(b);
  std::string la, lb;
  while (true) {
    const bool ga = static_cast<bool>(std::getline(sa, la));
    const bool gb = static_cast<bool>(std::getline(sb, lb));
    if (ga != gb) return false;
    if (!ga) return true;
    if (la == lb) continue;
    const auto ea = la.find('='), eb = lb.find('=');
    if (ea == std::string::npos || eb == std::string::npos || la.substr(0, ea) != lb.substr(0, eb)) return false;
    auto va = parse_list(trim(la.substr(ea + 1)), 0), vb = parse_list(trim(lb.substr(eb + 1)), 0);
    if (va.size() != vb.size()) return false;
    for (std::size_t i = 0; i < va.size(); ++i)
      if (!close(va[i], vb[i])) return false;
  }
}

ExperimentConfig parse_config(const std::string& text, bool validate) {
  ExperimentConfig c;
  auto table = schema(c);
  std::map<std::string, int> path_seen;  // a path section present in the file replaces the default ledger

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto& [name, fields] : table) known = known || name == section;
      for (const auto& [name, member] : kPathSections) {
        if (name == section) {
          known = true;
          if (!path_seen.count(name)) (c.*member).ledger.clear();
          path_seen[name] = line_no;
        }
      }
      if (!known) throw ConfigError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(line_no, "key '" + key + "' outside any section");

    bool handled = false;
    for (const auto& [name, member] : kPathSections) {
      if (name == section) {
        (c.*member).ledger.push_back({key, parse_double(value, line_no)});
        handled = true;
      }
    }
    if (handled) continue;
    for (auto& [name, fields] : table) {
      if (name != section) continue;
      for (auto& [k, field] : fields) {
        if (k == key) {
          field.set(value, line_no);
          handled = true;
        }
      }
    }
    if (!handled) throw ConfigError(line_no, "unknown key '" + key + "' in [" + section + "]");
  }
  c.source.pair_rate_per_channel = c.pair_rate(c.source.pump_power);
  if (validate) c.validate();
  return c;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path, bool validate) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), validate);
}

std::string serialize_config(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  auto table = schema(c);
  std::ostringstream out;
  for (const auto& [name, fields] : table) {
    out << "[" << name << "]\n";
    for (const auto& [k, field] : fields) {
      const auto v = field.get();
      if (!v.empty()) out << k << " = " << v << "\n";
    }
    out << "\n";
  }
  for (const auto& [name, member] : kPathSections) {
    out << "[" << name << "]\n";
    for (const auto& item : (c.*member).ledger) out << item.label << " = " << fmt(item.loss_db) << "\n";
    out << "\n";
  }
  return out.str();
}

}  // namespace qcomb::config
