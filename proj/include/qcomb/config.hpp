#pragma once

// Experiment configuration: INI-style text with [section] headers and
// key = value lines; '#' starts a comment. Defaults reproduce the device and
// detection parameters of the characterised source.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcomb/detector_chain.hpp"
#include "qcomb/pair_source.hpp"
#include "qcomb/ring_model.hpp"

namespace qcomb::config {

enum class Scenario { pairs_fig2, matrix_fig2b, car_sweep_fig3, hbt_fig4a, heralded_fig4b, fourport_fig5, custom };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

struct GridConfig {
  int pump_channel = 26;   // H26, 1556.15 nm
  double spacing = 200e9;  // ring FSR on the ITU grid
  int n_pairs = 5;         // s1..s5 / i1..i5
};

struct AnalysisConfig {
  Ticks bin_ticks = 1;
  double range = 500e-9;
  double far_offset = 50e-9;
  double fit_half_width = 100e-9;
  double herald_window = 0.81e-9;  // T_h
  double matrix_window = 2.0e-9;
};

struct SweepConfig {
  std::vector<double> powers{15e-3, 30e-3, 60e-3, 120e-3, 240e-3};
  double max_events = 1e7;  // surviving photon events per generation slice
};

struct ExperimentConfig {
  ring::RingSpec ring;
  GridConfig grid;
  source::SourceSpec source;
  detector::OpticalPath path_signal = detector::signal_detection_path();
  detector::OpticalPath path_idler = detector::idler_detection_path();
  detector::OpticalPath path_source_side = detector::source_side_path();
  detector::DetectorSpec det_signal;
  detector::DetectorSpec det_idler;
  detector::DetectorSpec det_herald_a;
  detector::DetectorSpec det_herald_b;
  AnalysisConfig analysis;
  SweepConfig sweep;

  Scenario scenario = Scenario::pairs_fig2;
  std::optional<double> duration;  // s; unset -> scenario default
  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir = "out";
  int channel_pair = 5;            // grid order for single-pair scenarios (s5/i5)
  double hbt_pump_power = 300e-3;  // g2 is rate independent; a high rate shortens the run
  double hbt_ratio = 0.5;          // 50:50 fiber splitter (also used in the heralded setup)

  ExperimentConfig();

  double scenario_duration() const;
  ring::ChannelGrid channel_grid() const;
  /// Pair rate at pump power P from the configured coefficient.
  double pair_rate(double power) const;
  /// Throws ConfigError(0, ...) on invariant violations.
  void validate() const;
  bool operator==(const ExperimentConfig& other) const;
};

/// With validate = false the caller applies overrides and calls validate() itself.
ExperimentConfig parse_config(const std::string& text, bool validate = true);
ExperimentConfig parse_config_file(const std::filesystem::path& path, bool validate = true);
std::string serialize_config(const ExperimentConfig& config);

}  // namespace qcomb::config
