#pragma once

// Named experiments: each wires generation, detection and analysis for one
// figure of the characterisation and writes a bundle directory:
//   config.ini, report.txt (key = value, with SHA-256 of every other file),
//   tags.qtt (QTT1) and one TSV table per figure panel.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qcomb/config.hpp"
#include "qcomb/correlation_analysis.hpp"
#include "qcomb/pair_source.hpp"
#include "qcomb/report.hpp"

namespace qcomb::scenario {

/// Channel ids in tag files: signal of grid order m -> 2(m-1), idler -> 2(m-1)+1.
inline int signal_channel_id(int order) { return 2 * (order - 1); }
inline int idler_channel_id(int order) { return 2 * (order - 1) + 1; }

struct ChannelRun {
  int order = 0;
  detector::TimeTagStream signal;
  detector::TimeTagStream idler;
  analysis::CoincidenceHistogram histogram;
  analysis::G2FitResult fit;
  analysis::CarReport car;
  double heralding_efficiency = 0;
  double backout = 0;          // from the coincidence rate
  double backout_singles = 0;  // from the signal singles
  double dark_share = 0;       // estimated fraction of accidentals involving a dark count
};

struct CombRun {
  double duration = 0;
  double pump_power = 0;
  double pair_rate = 0;
  std::vector<ChannelRun> channels;
};

/// Free-running detection of the given grid orders at one pump power.
/// Every channel shares one generation call; streams are per-channel substreams.
CombRun simulate_comb(const config::ExperimentConfig& cfg, const std::vector<int>& orders, double pump_power,
                      double duration, std::uint64_t seed);

struct SweepPoint {
  double power = 0;
  double duration = 0;
  ChannelRun run;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double slope = 0;  // d ln(CAR - 1) / d ln P over the accidental-dominated points
  int slope_points = 0;
  bool strictly_decreasing = false;
};

/// Each point runs for the scenario duration, generated as consecutive
/// independent time slices of at most sweep.max_events photon events.
SweepResult car_vs_power(const config::ExperimentConfig& cfg);

struct HbtRun {
  detector::TimeTagStream a, b;
  analysis::HbtResult result;
  double duration = 0;
};
/// The idler of channel_pair split on a fiber splitter onto two detectors.
HbtRun run_hbt(const config::ExperimentConfig& cfg);

struct HeraldedRun {
  detector::TimeTagStream signal, idler_a, idler_b;
  analysis::HeraldedReport report;
  double duration = 0;
};
/// Free-running signal detector triggering two gated idler detectors behind a splitter.
HeraldedRun run_heralded(const config::ExperimentConfig& cfg);

struct FourPortRun {
  source::PortCensus census;
  analysis::CoincidenceHistogram direct_hist, swapped_hist;
  analysis::G2FitResult direct_fit, swapped_fit;
  double duration = 0;
};
/// Signal filter on the drop port and idler filter on the through port, then swapped.
FourPortRun run_fourport(const config::ExperimentConfig& cfg);

struct Bundle {
  std::filesystem::path dir;
  report::Report report;
  std::vector<std::pair<std::string, std::string>> files;  // name, sha256
};

/// Runs cfg.scenario and writes the bundle to cfg.output_dir.
Bundle run_scenario(const config::ExperimentConfig& cfg);

/// Fields of the analysis records under a key prefix, units in the key names.
void add_fit(report::Report& r, const std::string& prefix, const analysis::G2FitResult& fit);
void add_car(report::Report& r, const std::string& prefix, const analysis::CarReport& car);
void add_heralded(report::Report& r, const std::string& prefix, const analysis::HeraldedReport& h);

report::Table histogram_table(const analysis::CoincidenceHistogram& h);

/// Verifies the SHA-256 lines of a bundle's report.txt; returns the names of mismatching files.
std::vector<std::string> verify_bundle(const std::filesystem::path& dir);

}  // namespace qcomb::scenario
