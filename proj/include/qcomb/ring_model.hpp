#pragma once

// Microring and comb-grid calculator. Every function here is pure.

#include <string>
#include <vector>

#include "qcomb/units.hpp"

namespace qcomb::ring {

struct RingSpec {
  double pump_wavelength = 1556.15e-9;  // m, H26
  double q_factor = 1.375e6;
  double linewidth = 140e6;             // Hz, device resonance width
  double fsr = 200e9;                   // Hz
  double radius = 135e-6;               // m
  double group_index = 1.768;           // not reported; back-computed from FSR and radius
  double enhancement = 17.9;            // field enhancement
  double thermal_coeff = -2e9;          // Hz/degC

  /// Throws std::domain_error naming the first violated invariant.
  void validate() const;
};

/// ITU DWDM channel label on the half-channel ("H") grid: f = 190.05 THz + n * 100 GHz.
struct ItuChannel {
  int index = 0;
  std::string label() const { return "H" + std::to_string(index); }
  double frequency() const { return 190.05e12 + 100e9 * index; }
  static ItuChannel nearest(double frequency_hz);
};

struct ChannelPair {
  int order = 0;  // m, 1-based distance from the pump in grid steps
  ItuChannel signal;
  ItuChannel idler;
  double signal_frequency = 0;
  double idler_frequency = 0;
  double signal_wavelength = 0;  // m
  double idler_wavelength = 0;   // m
};

struct ChannelGrid {
  ItuChannel pump;
  double pump_frequency = 0;
  double spacing = 200e9;
  std::vector<ChannelPair> pairs;
};

double frequency_to_wavelength(double frequency_hz);
double wavelength_to_frequency(double wavelength_m);

double linewidth_from_q(double wavelength_m, double q);
double coherence_time(double linewidth_hz);
ChannelGrid build_channel_grid(ItuChannel pump, double spacing_hz, int n_pairs);
double thermal_shift(double delta_t_celsius, double coeff_hz_per_celsius);
/// Pair rate relative to a non-resonant structure; E^6 for a triply resonant cavity.
double relative_pair_rate(double enhancement);
double fsr_from_geometry(double radius_m, double group_index);

}  // namespace qcomb::ring
