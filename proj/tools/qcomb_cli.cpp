// qcomb: simulate scenarios, analyze QTT1 tag files, inspect bundles.
//
// Failures print one line "error: <kind>: <message>" on stderr.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <system_error>
#include <optional>
#include <sstream>

#include "qcomb/config.hpp"
#include "qcomb/correlation_analysis.hpp"
#include "qcomb/report.hpp"
#include "qcomb/scenario.hpp"
#include "qcomb/timetag_file.hpp"

namespace {

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kConfig = 3, kFormat = 4, kIo = 5, kIntegrity = 6 };

int fail(Exit code, const std::string& kind, const std::string& message) {
  std::cerr << "error: " << kind << ": " << message << "\n";
  return code;
}

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path))
    throw std::filesystem::filesystem_error("cannot read input file", path,
                                            std::make_error_code(std::errc::no_such_file_or_directory));
}

int cmd_simulate(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> out,
                 std::optional<double> duration, std::optional<std::string> scenario) {
  require_file(path);
  auto cfg = qcomb::config::parse_config_file(path, false);
  if (seed) cfg.seed = seed;
  if (out) cfg.output_dir = *out;
  if (duration) cfg.duration = duration;
  if (scenario) {
    try {
      cfg.scenario = qcomb::config::scenario_from_string(*scenario);
    } catch (const std::invalid_argument& e) {
      throw qcomb::config::ConfigError(0, e.what());
    }
  }
  cfg.validate();
  const auto bundle = qcomb::scenario::run_scenario(cfg);
  std::cout << "bundle " << bundle.dir.string() << "\n";
  for (const auto& [name, digest] : bundle.files) std::cout << "  " << digest << "  " << name << "\n";
  return kOk;
}

std::pair<int, int> parse_pair(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("--pair expects <start>:<stop> channel ids");
  return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
}

int cmd_analyze(const std::vector<std::string>& files, const std::string& pair, const std::string& out,
                qcomb::Ticks bin, double range_ns, double far_ns, double jitter_ps) {
  const auto [s_id, i_id] = parse_pair(pair);
  std::vector<std::optional<qcomb::detector::TimeTagStream>> channels;
  for (const auto& f : files) require_file(f);
  for (const auto& f : files) {
    auto file = qcomb::io::read_timetags(f);
    for (auto& ch : file.channels) {
      if (ch.tags.empty()) continue;
      const auto id = static_cast<std::size_t>(ch.channel_id);
      if (channels.size() <= id) channels.resize(id + 1);
      if (channels[id]) throw qcomb::io::FormatError("channel " + std::to_string(id) + " appears in more than one file");
      channels[id] = std::move(ch);
    }
  }
  auto get = [&](int id) -> const qcomb::detector::TimeTagStream& {
    if (id < 0 || static_cast<std::size_t>(id) >= channels.size() || !channels[static_cast<std::size_t>(id)])
      throw std::invalid_argument("channel " + std::to_string(id) + " has no tags in the given files");
    return *channels[static_cast<std::size_t>(id)];
  };
  const auto& start = get(s_id);
  const auto& stop = get(i_id);

  qcomb::analysis::HistogramOptions ho;
  ho.bin_width = bin;
  ho.range = static_cast<qcomb::Ticks>(std::llround(range_ns * 1e-9 / start.tick));
  const auto hist = qcomb::analysis::cross_histogram(start, stop, ho);
  qcomb::analysis::FitOptions fo;
  const auto fit = qcomb::analysis::fit_g2(hist, jitter_ps * 1e-12, fo);
  const auto car = qcomb::analysis::compute_car(hist, fit, far_ns * 1e-9);

  const std::filesystem::path dir(out);
  qcomb::report::Report r;
  r.set("pair", pair);
  r.set("duration_s", hist.duration);
  r.set("singles_start_hz", car.singles_start);
  r.set("singles_stop_hz", car.singles_stop);
  qcomb::scenario::add_fit(r, "fit", fit);
  qcomb::scenario::add_car(r, "car", car);
  const auto digest = qcomb::report::write_file(dir / "histogram.tsv", qcomb::scenario::histogram_table(hist).to_tsv());
  r.set("sha256.histogram.tsv", digest);
  qcomb::report::write_file(dir / "report.txt", r.to_text());
  std::cout << r.to_text();
  return kOk;
}

int cmd_report(const std::string& dir) {
  const auto path = std::filesystem::path(dir) / "report.txt";
  if (!std::filesystem::exists(path)) return fail(kIo, "io", "no report.txt in " + dir);
  for (const auto& [k, v] : qcomb::report::read_report(path))
    if (!k.starts_with("sha256.")) std::cout << k << " = " << v << "\n";
  const auto bad = qcomb::scenario::verify_bundle(dir);
  if (!bad.empty()) return fail(kIntegrity, "integrity", "digest mismatch for " + bad.front());
  std::cout << "integrity = ok\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microring photon-pair source simulator and time-tag correlation toolkit"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run the scenario named in a config file");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir, scenario_name;
  std::optional<double> duration;
  sim->add_option("config", config_path, "Config file")->required();
  sim->add_option("--seed", seed, "Override experiment.seed");
  sim->add_option("--out", out_dir, "Override experiment.output_dir");
  sim->add_option("--duration", duration, "Override experiment.duration_s");
  sim->add_option("--scenario", scenario_name, "Override experiment.scenario");

  auto* ana = app.add_subcommand("analyze", "Histogram, fit and CAR for two channels of QTT1 files");
  std::vector<std::string> tag_files;
  std::string pair, analyze_out;
  qcomb::Ticks bin = 1;
  double range_ns = 500, far_ns = 50, jitter_ps = 0;
  ana->add_option("--tags", tag_files, "QTT1 files")->required();
  ana->add_option("--pair", pair, "start:stop channel ids")->required();
  ana->add_option("--out", analyze_out, "Output directory")->required();
  ana->add_option("--bin", bin, "Bin width in ticks (odd)");
  ana->add_option("--range-ns", range_ns, "Histogram half range");
  ana->add_option("--far-offset-ns", far_ns, "Start of the accidental region");
  ana->add_option("--jitter-ps", jitter_ps, "Per-detector Gaussian jitter sigma for the fit");

  auto* rep = app.add_subcommand("report", "Print a bundle's report and check its digests");
  std::string bundle_dir;
  rep->add_option("bundle", bundle_dir, "Bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, "usage", e.what());
  }

  try {
    if (*sim) return cmd_simulate(config_path, seed, out_dir, duration, scenario_name);
    if (*ana) return cmd_analyze(tag_files, pair, analyze_out, bin, range_ns, far_ns, jitter_ps);
    if (*rep) return cmd_report(bundle_dir);
  } catch (const qcomb::config::ConfigError& e) {
    return fail(kConfig, "config", e.what());
  } catch (const qcomb::io::FormatError& e) {
    return fail(kFormat, "format", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(kIo, "io", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kUsage, "usage", e.what());
  } catch (const std::domain_error& e) {
    return fail(kConfig, "domain", e.what());
  } catch (const std::exception& e) {
    return fail(kInternal, "runtime", e.what());
  }
  return kInternal;
}
