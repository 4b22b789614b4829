#pragma once

// Photon-pair emission model.
//
// Pairs are created by a compound-Poisson cluster process per thermal mode:
// cluster epochs arrive at rate (gamma/2) * ln(1 + mu) with logarithmic
// cluster sizes of parameter mu / (1 + mu), where mu = 2 p_k R / gamma is the
// mean occupation of a coherence cell. All pairs of one cluster share the
// creation time; every photon then leaves the cavity after an independent
// Exp(gamma) delay, gamma = 2 pi dnu. This gives
//   signal-idler:  g2(tau) = 1 + (gamma / 2R) exp(-gamma |tau|)
//   single arm:    g2(tau) = 1 + sum_k p_k^2 exp(-gamma |tau|)
// exactly. With Statistics::poissonian each pair is created independently.

#include <cstdint>
#include <span>
#include <vector>

#include "qcomb/rng.hpp"

namespace qcomb::source {

enum class Port : std::uint8_t { drop = 0, through = 1 };
enum class Statistics : std::uint8_t { thermal = 0, poissonian = 1 };

struct SourceSpec {
  std::vector<int> channel_pairs{1};  // grid orders m
  double linewidth = 110e6;           // Hz, generative biphoton bandwidth
  double pair_rate_per_channel = 3.0e5;
  std::vector<double> mode_weights{0.637, 0.363};
  double pump_power = 30e-3;          // W
  double rate_coefficient = 3.0e5 / (30e-3 * 30e-3);  // Hz/W^2
  double duration = 1.0;              // s
  std::uint64_t rng_seed = 0;
  double port_split = 0.5;            // probability of exiting the drop port
  Statistics statistics = Statistics::thermal;

  double gamma() const;
  /// Throws std::domain_error.
  void validate() const;
};

/// Bit flags on PairEvent::present.
inline constexpr std::uint8_t kSignalPresent = 1;
inline constexpr std::uint8_t kIdlerPresent = 2;

struct PairEvent {
  double t_create = 0;
  double t_signal_exit = 0;
  double t_idler_exit = 0;
  std::uint16_t channel_pair = 0;
  std::uint8_t mode_index = 0;
  Port signal_port = Port::drop;
  Port idler_port = Port::drop;
  std::uint8_t present = kSignalPresent | kIdlerPresent;

  bool has_signal() const { return present & kSignalPresent; }
  bool has_idler() const { return present & kIdlerPresent; }
};

/// Per-photon survival probabilities folded into generation. Marking is
/// independent per photon, so only pairs with at least one survivor are
/// emitted; the result has the same law as thinning the full stream.
struct ArmSurvival {
  double signal = 1.0;
  double idler = 1.0;
};

/// Generation is split into fixed blocks of this many seconds, each with its
/// own substream.
inline constexpr double kBlockSeconds = 0.05;

double rate_from_power(double coefficient, double power);

/// All channels and modes, sorted by creation time. Runs blocks in parallel
/// when OpenMP is available; the output is identical to generate_pairs_serial.
std::vector<PairEvent> generate_pairs(const SourceSpec& spec, ArmSurvival survival = {});
std::vector<PairEvent> generate_pairs_serial(const SourceSpec& spec, ArmSurvival survival = {});

/// Thermal statistics with the spec's mode weights. Empty weights throw.
std::vector<PairEvent> generate_multimode(const SourceSpec& spec, ArmSurvival survival = {});

/// Independent per-photon port draws.
void assign_ports(std::span<PairEvent> events, double port_split, std::uint64_t seed);

struct PortCensus {
  std::size_t different = 0;
  std::size_t both_drop = 0;
  std::size_t both_through = 0;
  std::size_t total() const { return different + both_drop + both_through; }
};
PortCensus port_census(std::span<const PairEvent> events);

double total_comb_rate(const SourceSpec& spec, int n_channels);

/// Sorted exit times of the surviving photons of one arm, optionally filtered
/// by channel and exit port.
enum class Arm { signal, idler };
struct ArrivalFilter {
  int channel_pair = -1;  // -1: any
  int port = -1;          // -1: any, else static_cast<int>(Port)
};
std::vector<double> arrivals(std::span<const PairEvent> events, Arm arm, ArrivalFilter filter = {});

}  // namespace qcomb::source
