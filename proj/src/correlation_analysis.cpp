#include "qcomb/correlation_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qcomb::analysis {

namespace {

struct FarWindows {
  double mean = 0;
  std::size_t count = 0;
};

// Tiles windows of `width` bins outward from the first bin with |tau - tau0| >= far_offset.
FarWindows far_windows(const CoincidenceHistogram& h, double tau0, double far_offset, std::size_t width) {
  FarWindows fw;
  if (width == 0) return fw;
  double sum = 0;
  auto window = [&](std::size_t first) {
    for (std::size_t j = first; j < first + width; ++j) sum += static_cast<double>(h.counts[j]);
    ++fw.count;
  };
  std::size_t i = 0;
  while (i < h.size() && h.tau(i) - tau0 < far_offset) ++i;
  for (; i + width <= h.size(); i += width) window(i);
  // Left side, walking outward from the last far bin.
  std::ptrdiff_t j = static_cast<std::ptrdiff_t>(h.size()) - 1;
  while (j >= 0 && tau0 - h.tau(static_cast<std::size_t>(j)) < far_offset) --j;
  for (; j + 1 >= static_cast<std::ptrdiff_t>(width); j -= static_cast<std::ptrdiff_t>(width))
    window(static_cast<std::size_t>(j + 1) - width);
  fw.mean = fw.count ? sum / static_cast<double>(fw.count) : 0.0;
  return fw;
}

}  // namespace

CarReport compute_car(const CoincidenceHistogram& hist, const G2FitResult& fit, double far_offset) {
  CarReport r;
  r.duration = hist.duration;
  if (hist.duration > 0) {
    r.singles_start = static_cast<double>(hist.n_start) / hist.duration;
    r.singles_stop = static_cast<double>(hist.n_stop) / hist.duration;
  }
  const double half = 0.5 * fit.fwhm;
  if (!(half > 0)) {
    r.low_statistics = true;
    return r;
  }
  for (std::size_t i = 0; i < hist.size(); ++i) {
    if (std::abs(hist.tau(i) - fit.tau0) <= half) {
      r.cc += hist.counts[i];
      ++r.window_bins;
    }
  }
  r.window_width = static_cast<double>(r.window_bins) * hist.bin_seconds();
  const auto fw = far_windows(hist, fit.tau0, far_offset, r.window_bins);
  r.ac = fw.mean;
  r.ac_windows = fw.count;
  if (r.ac > 0) {
    r.car = static_cast<double>(r.cc) / r.ac;
    r.car_defined = true;
  } else {
    r.car = std::numeric_limits<double>::infinity();
  }
  r.coincidence_rate = hist.duration > 0 ? static_cast<double>(r.cc) / hist.duration : 0.0;
  r.low_statistics = !fit.ok || r.cc < 10 || fw.count == 0;
  return r;
}

double heralded_efficiency(double cc, double c_signal, double eta_det) {
  if (!(c_signal > 0)) throw std::domain_error("signal count rate must be positive");
  if (!(eta_det > 0 && eta_det <= 1)) throw std::domain_error("detection efficiency must lie in (0, 1]");
  return cc / (c_signal * eta_det);
}

double backout_pair_rate(const CarReport& car, const detector::OpticalPath& path_signal,
                         const detector::OpticalPath& path_idler, double eta_signal, double eta_idler) {
  const double denom = path_signal.transmission() * eta_signal * path_idler.transmission() * eta_idler;
  if (!(denom > 0)) throw std::domain_error("zero transmission or efficiency in back-out");
  return car.coincidence_rate / denom;
}

double backout_from_singles(double singles, double dark_rate, const detector::OpticalPath& path, double eta) {
  const double denom = path.transmission() * eta;
  if (!(denom > 0)) throw std::domain_error("zero transmission or efficiency in back-out");
  return (singles - dark_rate) / denom;
}

double effective_modes(double g2_zero) {
  if (!(g2_zero > 1)) throw std::domain_error("effective mode number undefined for g2(0) <= 1");
  return 1.0 / (g2_zero - 1.0);
}

HbtResult hbt_autocorrelation(const detector::TimeTagStream& a, const detector::TimeTagStream& b,
                              const HbtOptions& options) {
  HbtResult r;
  HistogramOptions ho;
  ho.bin_width = options.bin_width;
  ho.range = static_cast<Ticks>(std::llround(options.range / a.tick));
  r.histogram = cross_histogram(a, b, ho);
  FitOptions fo;
  fo.fit_half_width = options.range;
  r.fit = fit_g2(r.histogram, options.jitter_sigma, fo);
  const double floor = far_floor(r.histogram, options.floor_min_tau);
  r.g2.resize(r.histogram.size());
  for (std::size_t i = 0; i < r.g2.size(); ++i)
    r.g2[i] = floor > 0 ? static_cast<double>(r.histogram.counts[i]) / floor : 0.0;
  if (r.fit.ok) {
    r.g2_zero = 1.0 + r.fit.contrast();
  } else {
    // No resolvable peak: central five bins against the far floor.
    const std::size_t c = r.histogram.size() / 2;
    double s = 0;
    std::size_t n = 0;
    for (std::size_t i = c >= 2 ? c - 2 : 0; i <= std::min(c + 2, r.g2.size() - 1); ++i, ++n) s += r.g2[i];
    r.g2_zero = n ? s / static_cast<double>(n) : 0.0;
  }
  r.n_defined = r.fit.ok && r.g2_zero > 1;
  if (r.n_defined) r.n_modes = effective_modes(r.g2_zero);
  return r;
}

HeraldedCounts heralded_counts(const detector::TimeTagStream& signal, const detector::TimeTagStream& a,
                               const detector::TimeTagStream& b, Ticks window, Ticks b_shift, std::size_t first,
                               std::size_t last) {
  HeraldedCounts c;
  if (first >= last) return c;
  const auto& s = signal.tags;
  auto a_lo = std::lower_bound(a.tags.begin(), a.tags.end(), s[first] - window);
  auto b_lo = std::lower_bound(b.tags.begin(), b.tags.end(), s[first] + b_shift - window);
  for (std::size_t k = first; k < last; ++k) {
    const Ticks t = s[k];
    while (a_lo != a.tags.end() && *a_lo < t - window) ++a_lo;
    while (b_lo != b.tags.end() && *b_lo < t + b_shift - window) ++b_lo;
    std::uint64_t na = 0, nb = 0;
    for (auto it = a_lo; it != a.tags.end() && *it <= t + window; ++it) ++na;
    for (auto it = b_lo; it != b.tags.end() && *it <= t + b_shift + window; ++it) ++nb;
    ++c.heralds;
    c.a += na;
    c.b += nb;
    c.ab += na * nb;
  }
  return c;
}

HeraldedCounts heralded_counts_parallel(const detector::TimeTagStream& signal, const detector::TimeTagStream& a,
                                        const detector::TimeTagStream& b, Ticks window, Ticks b_shift) {
  const std::size_t n = signal.tags.size();
  constexpr std::ptrdiff_t chunks = 64;
  std::uint64_t heralds = 0, na = 0, nb = 0, nab = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : heralds, na, nb, nab)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const std::size_t first = n * static_cast<std::size_t>(c) / chunks;
    const std::size_t last = n * static_cast<std::size_t>(c + 1) / chunks;
    const auto part = heralded_counts(signal, a, b, window, b_shift, first, last);
    heralds += part.heralds;
    na += part.a;
    nb += part.b;
    nab += part.ab;
  }
  return {heralds, na, nb, nab};
}

namespace {

double ratio(const HeraldedCounts& c) {
  if (c.a == 0 || c.b == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(c.ab) * static_cast<double>(c.heralds) /
         (static_cast<double>(c.a) * static_cast<double>(c.b));
}

}  // namespace

HeraldedReport heralded_g2(const detector::TimeTagStream& signal, const detector::TimeTagStream& idler_a,
                           const detector::TimeTagStream& idler_b, const HeraldedOptions& options) {
  if (!(options.herald_window > 0)) throw std::domain_error("herald window must be positive");
  if (signal.tick != idler_a.tick || signal.tick != idler_b.tick)
    throw std::invalid_argument("heralded_g2: streams use different ticks");
  HeraldedReport r;
  r.herald_window = options.herald_window;
  const Ticks w = std::max<Ticks>(0, std::llround(options.herald_window / signal.tick));

  const auto zero = heralded_counts_parallel(signal, idler_a, idler_b, w, 0);
  r.n_heralds = zero.heralds;
  r.n_a = zero.a;
  r.n_b = zero.b;
  r.n_triples = zero.ab;
  r.g_h_zero = zero.ab == 0 ? 0.0 : ratio(zero);
  if (std::isnan(r.g_h_zero)) r.g_h_zero = 0.0;
  r.low_statistics = r.n_triples < 100;

  const double duration = std::max({signal.duration, idler_a.duration, idler_b.duration});
  if (duration > 0 && zero.a > 0 && zero.b > 0) {
    const double span = 2.0 * static_cast<double>(w + 1) * signal.tick;  // inclusive window
    const double ss = static_cast<double>(signal.tags.size()) / duration;
    const double sa = static_cast<double>(idler_a.tags.size()) / duration;
    const double sb = static_cast<double>(idler_b.tags.size()) / duration;
    const double p_iis = static_cast<double>(zero.ab) / (duration * span * span);
    const double g_sa = static_cast<double>(zero.a) / (ss * sa * duration * span);
    const double g_sb = static_cast<double>(zero.b) / (ss * sb * duration * span);
    r.literal_ratio = p_iis / (ss * sa * sb * g_sa * g_sb);
  }

  // Partition ensemble: equal sub-durations of herald time.
  const int parts = std::max(options.partitions, 1);
  const auto& s = signal.tags;
  const double span_ticks = duration / signal.tick;
  std::size_t first = 0;
  std::vector<double> values;
  for (int p = 0; p < parts; ++p) {
    const auto edge = static_cast<Ticks>(std::floor(span_ticks * (p + 1) / parts));
    const std::size_t last = p + 1 == parts
                                 ? s.size()
                                 : static_cast<std::size_t>(std::lower_bound(s.begin(), s.end(), edge) - s.begin());
    const auto c = heralded_counts(signal, idler_a, idler_b, w, 0, first, last);
    double v = c.ab == 0 && c.a > 0 && c.b > 0 ? 0.0 : ratio(c);
    if (!std::isnan(v)) values.push_back(v);
    first = last;
  }
  r.partition_values = values;
  if (values.size() >= 2) {
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    r.uncertainty = std::sqrt(var / static_cast<double>(values.size() - 1));
  }
  if (values.size() < static_cast<std::size_t>(parts)) r.low_statistics = true;

  for (int k = -options.curve_half_points; k <= options.curve_half_points; ++k) {
    const Ticks shift = 2 * w * k;
    const auto c = k == 0 ? zero : heralded_counts_parallel(signal, idler_a, idler_b, w, shift);
    const double g = ratio(c);
    r.curve_tau.push_back(static_cast<double>(shift) * signal.tick);
    r.curve_g.push_back(std::isnan(g) ? 0.0 : g);
  }
  return r;
}

CoincidenceMatrix coincidence_matrix(const std::vector<detector::TimeTagStream>& signals,
                                     const std::vector<detector::TimeTagStream>& idlers,
                                     const MatrixOptions& options) {
  CoincidenceMatrix m;
  m.n_signal = signals.size();
  m.n_idler = idlers.size();
  m.significance.assign(m.n_signal * m.n_idler, 0.0);
  m.peak_counts.assign(m.n_signal * m.n_idler, 0);
  m.accidental.assign(m.n_signal * m.n_idler, 0.0);
  for (std::size_t si = 0; si < m.n_signal; ++si) {
    for (std::size_t ii = 0; ii < m.n_idler; ++ii) {
      const auto& s = signals[si];
      HistogramOptions ho;
      ho.bin_width = options.bin_width;
      ho.range = static_cast<Ticks>(std::llround(options.range / s.tick));
      const auto h = cross_histogram(s, idlers[ii], ho);
      std::uint64_t cc = 0;
      std::size_t bins = 0;
      for (std::size_t i = 0; i < h.size(); ++i)
        if (std::abs(h.tau(i)) <= 0.5 * options.window) {
          cc += h.counts[i];
          ++bins;
        }
      const auto fw = far_windows(h, 0.0, options.far_offset, bins);
      const std::size_t k = si * m.n_idler + ii;
      m.peak_counts[k] = cc;
      m.accidental[k] = fw.mean;
      m.significance[k] = (static_cast<double>(cc) - fw.mean) / std::sqrt(std::max(fw.mean, 1.0));
    }
  }
  return m;
}

}  // namespace qcomb::analysis
