#include "qcomb/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef QCOMB_HAVE_OPENMP
#include <omp.h>
#endif

namespace qcomb::analysis {

std::uint64_t CoincidenceHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

namespace {

CoincidenceHistogram empty_histogram(const detector::TimeTagStream& start, const detector::TimeTagStream& stop,
                                     const HistogramOptions& o) {
  if (start.tick != stop.tick) throw std::invalid_argument("cross_histogram: streams use different ticks");
  if (o.bin_width < 1 || o.bin_width % 2 == 0) throw std::invalid_argument("cross_histogram: bin width must be odd");
  if (o.range < 0) throw std::invalid_argument("cross_histogram: range must be non-negative");
  CoincidenceHistogram h;
  h.bin_width = o.bin_width;
  h.half_bins = o.range / o.bin_width;
  h.tick = start.tick;
  h.counts.assign(static_cast<std::size_t>(2 * h.half_bins + 1), 0);
  h.n_start = start.tags.size();
  h.n_stop = stop.tags.size();
  h.duration = std::max(start.duration, stop.duration);
  return h;
}

// Accumulates starts [begin, end) into counts.
void accumulate(const std::vector<Ticks>& starts, const std::vector<Ticks>& stops, std::size_t begin,
                std::size_t end, Ticks bin, std::int64_t half_bins, bool same_stream,
                std::vector<std::uint64_t>& counts) {
  const Ticks half = (bin - 1) / 2;
  const Ticks reach = half_bins * bin + half;
  if (begin >= end) return;
  auto lo = std::lower_bound(stops.begin(), stops.end(), starts[begin] - reach);
  for (std::size_t i = begin; i < end; ++i) {
    const Ticks t = starts[i];
    while (lo != stops.end() && *lo < t - reach) ++lo;
    for (auto it = lo; it != stops.end() && *it <= t + reach; ++it) {
      if (same_stream && static_cast<std::size_t>(it - stops.begin()) == i) continue;
      const Ticks d = *it - t;
      // floor((d + half) / bin) for possibly negative d
      const Ticks shifted = d + half + half_bins * bin;
      counts[static_cast<std::size_t>(shifted / bin)] += 1;
    }
  }
}

}  // namespace

CoincidenceHistogram cross_histogram_serial(const detector::TimeTagStream& start,
                                            const detector::TimeTagStream& stop, const HistogramOptions& options) {
  auto h = empty_histogram(start, stop, options);
  accumulate(start.tags, stop.tags, 0, start.tags.size(), h.bin_width, h.half_bins, options.same_stream, h.counts);
  return h;
}

CoincidenceHistogram cross_histogram(const detector::TimeTagStream& start, const detector::TimeTagStream& stop,
                                     const HistogramOptions& options) {
  auto h = empty_histogram(start, stop, options);
  const std::size_t n = start.tags.size();
#ifdef QCOMB_HAVE_OPENMP
  const int threads = omp_get_max_threads();
  if (threads > 1 && n > 4096) {
    const auto chunks = static_cast<std::ptrdiff_t>(threads) * 4;
    std::vector<std::vector<std::uint64_t>> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
      auto& local = partial[static_cast<std::size_t>(c)];
      local.assign(h.counts.size(), 0);
      const std::size_t b = n * static_cast<std::size_t>(c) / static_cast<std::size_t>(chunks);
      const std::size_t e = n * static_cast<std::size_t>(c + 1) / static_cast<std::size_t>(chunks);
      accumulate(start.tags, stop.tags, b, e, h.bin_width, h.half_bins, options.same_stream, local);
    }
    // Integer sums: merge order does not change the result.
    for (const auto& local : partial)
      for (std::size_t i = 0; i < local.size(); ++i) h.counts[i] += local[i];
    return h;
  }
#endif
  accumulate(start.tags, stop.tags, 0, n, h.bin_width, h.half_bins, options.same_stream, h.counts);
  return h;
}

double far_floor(const CoincidenceHistogram& h, double min_abs_tau) {
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (std::abs(h.tau(i)) >= min_abs_tau) {
      sum += static_cast<double>(h.counts[i]);
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace qcomb::analysis
