#include "qcomb/ring_model.hpp"

#include <cmath>
#include <stdexcept>

namespace qcomb::ring {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0) || !std::isfinite(v))
    throw std::domain_error(std::string(what) + " must be positive and finite");
}

}  // namespace

void RingSpec::validate() const {
  require_positive(pump_wavelength, "pump_wavelength");
  require_positive(q_factor, "q_factor");
  require_positive(linewidth, "linewidth");
  require_positive(fsr, "fsr");
  require_positive(radius, "radius");
  require_positive(group_index, "group_index");
  require_positive(enhancement, "enhancement");
  if (!std::isfinite(thermal_coeff)) throw std::domain_error("thermal_coeff must be finite");

  const double lw = linewidth_from_q(pump_wavelength, q_factor);
  if (std::abs(linewidth - lw) > 0.01 * lw)
    throw std::domain_error("linewidth inconsistent with q_factor at the pump wavelength");
  const double f = fsr_from_geometry(radius, group_index);
  if (std::abs(fsr - f) > 0.01 * f)
    throw std::domain_error("fsr inconsistent with radius and group_index");
}

ItuChannel ItuChannel::nearest(double frequency_hz) {
  return ItuChannel{static_cast<int>(std::lround((frequency_hz - 190.05e12) / 100e9))};
}

double frequency_to_wavelength(double frequency_hz) {
  require_positive(frequency_hz, "frequency");
  return kSpeedOfLight / frequency_hz;
}

double wavelength_to_frequency(double wavelength_m) {
  require_positive(wavelength_m, "wavelength");
  return kSpeedOfLight / wavelength_m;
}

double linewidth_from_q(double wavelength_m, double q) {
  require_positive(wavelength_m, "wavelength");
  require_positive(q, "q");
  return kSpeedOfLight / wavelength_m / q;
}

double coherence_time(double linewidth_hz) {
  require_positive(linewidth_hz, "linewidth");
  return 1.0 / (kPi * linewidth_hz);
}

ChannelGrid build_channel_grid(ItuChannel pump, double spacing_hz, int n_pairs) {
  require_positive(spacing_hz, "spacing");
  if (n_pairs < 0) throw std::domain_error("n_pairs must be non-negative");

  ChannelGrid grid;
  grid.pump = pump;
  grid.pump_frequency = pump.frequency();
  grid.spacing = spacing_hz;
  const double pump_f = grid.pump_frequency;
  if (!(pump_f - n_pairs * spacing_hz > 0))
    throw std::domain_error("grid extends below zero frequency");

  grid.pairs.reserve(static_cast<std::size_t>(n_pairs));
  for (int m = 1; m <= n_pairs; ++m) {
    ChannelPair p;
    p.order = m;
    // Signal on the blue side, idler on the red side (Table-style labelling).
    p.signal_frequency = pump_f + m * spacing_hz;
    p.idler_frequency = pump_f - m * spacing_hz;
    p.signal = ItuChannel::nearest(p.signal_frequency);
    p.idler = ItuChannel::nearest(p.idler_frequency);
    p.signal_wavelength = frequency_to_wavelength(p.signal_frequency);
    p.idler_wavelength = frequency_to_wavelength(p.idler_frequency);
    grid.pairs.push_back(p);
  }
  return grid;
}

double thermal_shift(double delta_t_celsius, double coeff_hz_per_celsius) {
  return coeff_hz_per_celsius * delta_t_celsius;
}

double relative_pair_rate(double enhancement) {
  require_positive(enhancement, "enhancement");
  const double e2 = enhancement * enhancement;
  return e2 * e2 * e2;
}

double fsr_from_geometry(double radius_m, double group_index) {
  require_positive(radius_m, "radius");
  require_positive(group_index, "group_index");
  return kSpeedOfLight / (2.0 * kPi * radius_m * group_index);
}

}  // namespace qcomb::ring
