#pragma once

// Estimators over time-tag streams: CAR, heralding efficiency, single-arm
// autocorrelation, heralded autocorrelation, channel coincidence matrix and
// pair-rate back-out.

#include <cstdint>
#include <vector>

#include "qcomb/detector_chain.hpp"
#include "qcomb/g2_fit.hpp"
#include "qcomb/histogram.hpp"

namespace qcomb::analysis {

struct CarReport {
  std::uint64_t cc = 0;        // counts in the FWHM window
  double ac = 0;               // mean counts per equal-width far window
  std::size_t ac_windows = 0;
  double car = 0;
  bool car_defined = false;    // false when ac == 0 (car reported as +inf)
  double window_width = 0;     // s
  std::size_t window_bins = 0;
  double singles_start = 0;    // Hz
  double singles_stop = 0;     // Hz
  double coincidence_rate = 0; // cc / duration, Hz
  double duration = 0;
  bool low_statistics = false;
};

/// Equal-width accidental windows tiled over |tau - tau0| >= far_offset on both sides.
CarReport compute_car(const CoincidenceHistogram& hist, const G2FitResult& fit, double far_offset);

/// cc / (c_signal * eta_det).
double heralded_efficiency(double cc, double c_signal, double eta_det);

/// coincidence_rate / (T_s eta_s T_i eta_i).
double backout_pair_rate(const CarReport& car, const detector::OpticalPath& path_signal,
                         const detector::OpticalPath& path_idler, double eta_signal, double eta_idler);
/// (singles - dark) / (T eta): the single-arm estimate of the pair rate.
double backout_from_singles(double singles, double dark_rate, const detector::OpticalPath& path, double eta);

struct HbtOptions {
  Ticks bin_width = 1;
  double range = 200e-9;
  double jitter_sigma = 0;       // per detector
  double floor_min_tau = 58e-9;  // ~20 coherence times
};

struct HbtResult {
  CoincidenceHistogram histogram;
  G2FitResult fit;
  std::vector<double> g2;  // histogram / far floor
  double g2_zero = 0;
  double n_modes = 0;
  bool n_defined = false;
};

/// Two detector streams behind a beam splitter on one optical channel.
HbtResult hbt_autocorrelation(const detector::TimeTagStream& a, const detector::TimeTagStream& b,
                              const HbtOptions& options);
/// N = 1 / (g2(0) - 1); throws std::domain_error for g2(0) <= 1.
double effective_modes(double g2_zero);

struct HeraldedOptions {
  double herald_window = 0.81e-9;  // T_h
  int partitions = 6;
  int curve_half_points = 12;      // tau = k * 2 T_h, |k| <= this
};

struct HeraldedReport {
  double g_h_zero = 0;
  double uncertainty = 0;    // std-dev over partitions
  double herald_window = 0;
  std::uint64_t n_triples = 0;
  std::uint64_t n_heralds = 0;
  std::uint64_t n_a = 0;     // heralded counts on a
  std::uint64_t n_b = 0;
  double literal_ratio = 0;  // P_iis / (S_s S_a S_b g_sa g_sb) from window-binned rates
  bool low_statistics = false;
  std::vector<double> curve_tau;
  std::vector<double> curve_g;
  std::vector<double> partition_values;
};

struct HeraldedCounts {
  std::uint64_t heralds = 0, a = 0, b = 0, ab = 0;
};

/// Exhaustive counting of a and b tags within [t_s - w, t_s + w] (b window shifted by
/// b_shift ticks) for heralds with index in [first, last).
HeraldedCounts heralded_counts(const detector::TimeTagStream& signal, const detector::TimeTagStream& a,
                               const detector::TimeTagStream& b, Ticks window, Ticks b_shift,
                               std::size_t first, std::size_t last);
HeraldedCounts heralded_counts_parallel(const detector::TimeTagStream& signal, const detector::TimeTagStream& a,
                                        const detector::TimeTagStream& b, Ticks window, Ticks b_shift);

HeraldedReport heralded_g2(const detector::TimeTagStream& signal, const detector::TimeTagStream& idler_a,
                           const detector::TimeTagStream& idler_b, const HeraldedOptions& options = {});

struct MatrixOptions {
  Ticks bin_width = 1;
  double range = 500e-9;
  double window = 2.0e-9;
  double far_offset = 50e-9;
};

struct CoincidenceMatrix {
  std::size_t n_signal = 0, n_idler = 0;
  std::vector<double> significance;  // row-major [signal][idler], in accidental sigmas
  std::vector<std::uint64_t> peak_counts;
  std::vector<double> accidental;
  double at(std::size_t s, std::size_t i) const { return significance[s * n_idler + i]; }
};

CoincidenceMatrix coincidence_matrix(const std::vector<detector::TimeTagStream>& signals,
                                     const std::vector<detector::TimeTagStream>& idlers,
                                     const MatrixOptions& options = {});

}  // namespace qcomb::analysis
