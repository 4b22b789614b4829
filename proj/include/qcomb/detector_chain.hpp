#pragma once

// Optical loss, beam splitting and single-photon detection.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qcomb/rng.hpp"
#include "qcomb/units.hpp"

namespace qcomb::detector {

struct LossItem {
  std::string label;
  double loss_db = 0;
};

struct OpticalPath {
  std::vector<LossItem> ledger;

  double total_db() const;
  double transmission() const;
  void validate() const;
};

/// Detection-system ledgers (after the ring drop-port fiber).
OpticalPath signal_detection_path();  // 0.4 + 2.0 + 1.0 dB
OpticalPath idler_detection_path();   // 0.4 + 2.0 + 0.6 dB
/// On-chip items upstream of the drop-port fiber: single-port collection and facet coupling.
OpticalPath source_side_path();       // 6.0 + 1.5 dB
/// Full arm ledgers, source side plus detection system (10.9 / 10.5 dB).
OpticalPath full_signal_path();
OpticalPath full_idler_path();

enum class Mode { free_running, gated };

/// Combined two-detector coincidence FWHM the paper attributes to jitter.
inline constexpr double kCombinedJitterFwhm = 810e-12;
/// Per-detector Gaussian sigma if the combined FWHM is shared by two equal detectors.
double per_detector_sigma(double combined_fwhm);

struct DetectorSpec {
  double quantum_efficiency = 0.05;
  double dead_time = 25e-6;    // non-paralyzable
  double dark_rate = 1.3e3;    // Hz, observed with the light off (after dead time)
  double jitter_sigma = per_detector_sigma(kCombinedJitterFwhm);
  Mode mode = Mode::free_running;
  double gate_length = 20e-9;
  double gate_offset = -10e-9;  // gate opens at trigger + offset
  double tick = 81e-12;

  void validate() const;
  static DetectorSpec ideal(double tick = 81e-12);
};

struct TimeTagStream {
  int channel_id = 0;
  std::vector<Ticks> tags;  // strictly increasing
  double tick = 81e-12;
  double duration = 0;

  double rate() const { return duration > 0 ? static_cast<double>(tags.size()) / duration : 0.0; }
  bool operator==(const TimeTagStream&) const = default;
};

std::vector<double> apply_loss(std::span<const double> arrivals, const OpticalPath& path, Rng& rng);
std::pair<std::vector<double>, std::vector<double>> beam_splitter(std::span<const double> arrivals, double ratio,
                                                                  Rng& rng);

/// QE thinning -> dark counts merged -> Gaussian jitter -> sort -> keep [0, duration)
/// -> dead time -> quantize. Two clicks landing in one tick register once.
TimeTagStream detect(std::span<const double> arrivals, const DetectorSpec& spec, double duration, Rng& rng,
                     int channel_id = 0);
/// Gated detection: as detect, but clicks outside every trigger gate are
/// discarded before the dead-time filter (a closed gate cannot arm the detector).
TimeTagStream detect_gated(std::span<const double> arrivals, const DetectorSpec& spec,
                           std::span<const double> triggers, double duration, Rng& rng, int channel_id = 0);

/// Keeps tags in [t_trig, t_trig + window) for some trigger. Same tick required.
TimeTagStream gate(const TimeTagStream& tags, const TimeTagStream& triggers, double window);

/// floor(t / tick); throws std::domain_error for t < 0 or tick <= 0.
Ticks quantize(double t, double tick);

/// Poisson rate of dark events that shows up as spec.dark_rate after the dead-time filter.
double intrinsic_dark_rate(const DetectorSpec& spec);

/// Non-paralyzable dead-time filter on sorted times.
std::vector<double> dead_time_filter(std::span<const double> sorted_times, double dead_time);

/// ηλ / (1 + ηλτ).
double nonparalyzable_rate(double input_rate, double efficiency, double dead_time);

/// Seconds of a stream's tags.
std::vector<double> to_seconds(const TimeTagStream& s);

}  // namespace qcomb::detector
