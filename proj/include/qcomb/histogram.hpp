#pragma once

// Start-stop coincidence histograms over integer time tags.
//
// Bins are centered: with an odd width of b ticks, bin k holds tick
// differences d = t_stop - t_start with k*b - (b-1)/2 <= d <= k*b + (b-1)/2,
// for -K <= k <= K. Counting is multi-stop (every stop in range counts).

#include <cstdint>
#include <vector>

#include "qcomb/detector_chain.hpp"
#include "qcomb/units.hpp"

namespace qcomb::analysis {

struct CoincidenceHistogram {
  Ticks bin_width = 1;
  std::int64_t half_bins = 0;  // K
  double tick = 81e-12;
  std::vector<std::uint64_t> counts;  // 2K + 1
  std::size_t n_start = 0;
  std::size_t n_stop = 0;
  double duration = 0;

  std::size_t size() const { return counts.size(); }
  /// Delay of bin i (0-based) in seconds.
  double tau(std::size_t i) const {
    return static_cast<double>((static_cast<std::int64_t>(i) - half_bins) * bin_width) * tick;
  }
  double bin_seconds() const { return static_cast<double>(bin_width) * tick; }
  std::uint64_t total() const;
  bool operator==(const CoincidenceHistogram&) const = default;
};

struct HistogramOptions {
  Ticks bin_width = 1;  // odd
  Ticks range = 0;      // maximum |tau| in ticks; K = range / bin_width
  bool same_stream = false;  // skip pairing a tag with itself
};

/// Parallel over start tags; bit-identical to cross_histogram_serial.
CoincidenceHistogram cross_histogram(const detector::TimeTagStream& start, const detector::TimeTagStream& stop,
                                     const HistogramOptions& options);
CoincidenceHistogram cross_histogram_serial(const detector::TimeTagStream& start,
                                            const detector::TimeTagStream& stop, const HistogramOptions& options);

/// Mean counts per bin over bins with |tau| >= min_abs_tau.
double far_floor(const CoincidenceHistogram& h, double min_abs_tau);

}  // namespace qcomb::analysis
