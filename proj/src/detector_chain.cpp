#include "qcomb/detector_chain.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qcomb::detector {

double OpticalPath::total_db() const {
  double sum = 0;
  for (const auto& item : ledger) sum += item.loss_db;
  return sum;
}

double OpticalPath::transmission() const { return std::pow(10.0, -total_db() / 10.0); }

void OpticalPath::validate() const {
  for (const auto& item : ledger)
    if (!std::isfinite(item.loss_db)) throw std::domain_error("loss entry '" + item.label + "' is not finite");
  const double t = transmission();
  if (!(t > 0 && t <= 1)) throw std::domain_error("optical path transmission must lie in (0, 1]");
}

OpticalPath signal_detection_path() {
  return {{{"dwdm_pump_reflect", 0.4}, {"notch_filter", 2.0}, {"channel_dwdm", 1.0}}};
}

OpticalPath idler_detection_path() {
  return {{{"dwdm_pump_reflect", 0.4}, {"notch_filter", 2.0}, {"channel_dwdm", 0.6}}};
}

OpticalPath source_side_path() { return {{{"single_port_collection", 6.0}, {"facet_coupling", 1.5}}}; }

namespace {
OpticalPath concat(OpticalPath a, const OpticalPath& b) {
  a.ledger.insert(a.ledger.end(), b.ledger.begin(), b.ledger.end());
  return a;
}
}  // namespace

OpticalPath full_signal_path() { return concat(source_side_path(), signal_detection_path()); }
OpticalPath full_idler_path() { return concat(source_side_path(), idler_detection_path()); }

double per_detector_sigma(double combined_fwhm) {
  return combined_fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)) * std::sqrt(2.0));
}

void DetectorSpec::validate() const {
  if (!(quantum_efficiency >= 0 && quantum_efficiency <= 1)) throw std::domain_error("quantum_efficiency must lie in [0, 1]");
  if (!(dead_time >= 0)) throw std::domain_error("dead_time must be non-negative");
  if (!(dark_rate >= 0)) throw std::domain_error("dark_rate must be non-negative");
  if (!(dark_rate * dead_time < 1)) throw std::domain_error("dark_rate * dead_time must be below 1");
  if (!(jitter_sigma >= 0)) throw std::domain_error("jitter_sigma must be non-negative");
  if (!(tick > 0)) throw std::domain_error("tick must be positive");
  if (mode == Mode::gated && !(gate_length >= 0)) throw std::domain_error("gate_length must be non-negative");
}

DetectorSpec DetectorSpec::ideal(double tick) {
  DetectorSpec d;
  d.quantum_efficiency = 1.0;
  d.dead_time = 0;
  d.dark_rate = 0;
  d.jitter_sigma = 0;
  d.tick = tick;
  return d;
}

std::vector<double> apply_loss(std::span<const double> arrivals, const OpticalPath& path, Rng& rng) {
  path.validate();
  const double t = path.transmission();
  if (t >= 1.0) return {arrivals.begin(), arrivals.end()};
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(static_cast<double>(arrivals.size()) * t * 1.1) + 16);
  for (double a : arrivals)
    if (bernoulli(rng, t)) out.push_back(a);
  return out;
}

std::pair<std::vector<double>, std::vector<double>> beam_splitter(std::span<const double> arrivals, double ratio,
                                                                  Rng& rng) {
  if (!(ratio >= 0 && ratio <= 1)) throw std::domain_error("splitting ratio must lie in [0, 1]");
  std::pair<std::vector<double>, std::vector<double>> out;
  for (double a : arrivals) (bernoulli(rng, ratio) ? out.first : out.second).push_back(a);
  return out;
}

Ticks quantize(double t, double tick) {
  if (!(tick > 0)) throw std::domain_error("tick must be positive");
  if (t < 0) throw std::domain_error("cannot quantize a negative time");
  return static_cast<Ticks>(std::floor(t / tick));
}

std::vector<double> dead_time_filter(std::span<const double> sorted_times, double dead_time) {
  std::vector<double> out;
  out.reserve(sorted_times.size());
  double blocked_until = -INFINITY;
  for (double t : sorted_times) {
    if (t < blocked_until) continue;
    out.push_back(t);
    blocked_until = t + dead_time;
  }
  return out;
}

double intrinsic_dark_rate(const DetectorSpec& spec) {
  return spec.dark_rate / (1.0 - spec.dark_rate * spec.dead_time);
}

double nonparalyzable_rate(double input_rate, double efficiency, double dead_time) {
  const double r = input_rate * efficiency;
  return r / (1.0 + r * dead_time);
}

namespace {

std::vector<double> raw_clicks(std::span<const double> arrivals, const DetectorSpec& spec, double duration, Rng& rng) {
  spec.validate();
  std::vector<double> clicks;
  clicks.reserve(arrivals.size() + static_cast<std::size_t>(spec.dark_rate * std::max(duration, 0.0) * 1.1) + 16);
  if (spec.quantum_efficiency >= 1.0) {
    clicks.assign(arrivals.begin(), arrivals.end());
  } else {
    for (double a : arrivals)
      if (bernoulli(rng, spec.quantum_efficiency)) clicks.push_back(a);
  }
  const double dark = intrinsic_dark_rate(spec);
  if (dark > 0 && duration > 0)
    for (double t = exponential(rng, dark); t < duration; t += exponential(rng, dark)) clicks.push_back(t);
  if (spec.jitter_sigma > 0) {
    std::normal_distribution<double> jitter(0.0, spec.jitter_sigma);
    for (double& c : clicks) c += jitter(rng);
  }
  std::sort(clicks.begin(), clicks.end());
  const auto first = std::lower_bound(clicks.begin(), clicks.end(), 0.0);
  const auto last = std::lower_bound(clicks.begin(), clicks.end(), duration);
  return {first, last};
}

TimeTagStream finish(std::span<const double> clicks, const DetectorSpec& spec, double duration, int channel_id) {
  const auto live = dead_time_filter(clicks, spec.dead_time);
  TimeTagStream s;
  s.channel_id = channel_id;
  s.tick = spec.tick;
  s.duration = std::max(duration, 0.0);
  s.tags.reserve(live.size());
  for (double t : live) {
    const Ticks k = quantize(t, spec.tick);
    if (s.tags.empty() || k > s.tags.back()) s.tags.push_back(k);
  }
  return s;
}

}  // namespace

TimeTagStream detect(std::span<const double> arrivals, const DetectorSpec& spec, double duration, Rng& rng,
                     int channel_id) {
  const auto clicks = raw_clicks(arrivals, spec, duration, rng);
  return finish(clicks, spec, duration, channel_id);
}

TimeTagStream detect_gated(std::span<const double> arrivals, const DetectorSpec& spec,
                           std::span<const double> triggers, double duration, Rng& rng, int channel_id) {
  const auto clicks = raw_clicks(arrivals, spec, duration, rng);
  std::vector<double> gated;
  std::size_t k = 0;
  for (double c : clicks) {
    // Latest gate opening at or before c.
    while (k < triggers.size() && triggers[k] + spec.gate_offset <= c) ++k;
    if (k > 0) {
      const double open = triggers[k - 1] + spec.gate_offset;
      // Equal gate lengths: the latest opening is the last to close.
      if (c >= open && c < open + spec.gate_length) gated.push_back(c);
    }
  }
  return finish(gated, spec, duration, channel_id);
}

TimeTagStream gate(const TimeTagStream& tags, const TimeTagStream& triggers, double window) {
  if (tags.tick != triggers.tick) throw std::invalid_argument("gate: streams use different ticks");
  TimeTagStream out = tags;
  out.tags.clear();
  if (!(window > 0)) return out;
  const double w = window / tags.tick;
  std::size_t k = 0;
  for (Ticks t : tags.tags) {
    while (k < triggers.tags.size() && triggers.tags[k] <= t) ++k;
    if (k > 0 && static_cast<double>(t - triggers.tags[k - 1]) < w) out.tags.push_back(t);
  }
  return out;
}

std::vector<double> to_seconds(const TimeTagStream& s) {
  std::vector<double> out;
  out.reserve(s.tags.size());
  for (Ticks t : s.tags) out.push_back(static_cast<double>(t) * s.tick);
  return out;
}

}  // namespace qcomb::detector
