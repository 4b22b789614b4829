#include "qcomb/pair_source.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qcomb/units.hpp"

namespace qcomb::source {

double SourceSpec::gamma() const { return 2.0 * kPi * linewidth; }

void SourceSpec::validate() const {
  if (!(linewidth > 0) || !std::isfinite(linewidth))
    throw std::domain_error("linewidth must be positive");
  if (!(pair_rate_per_channel >= 0) || !std::isfinite(pair_rate_per_channel))
    throw std::domain_error("pair_rate_per_channel must be non-negative and finite");
  if (rate_coefficient < 0 || pump_power < 0)
    throw std::domain_error("rate_coefficient and pump_power must be non-negative");
  if (!(port_split >= 0 && port_split <= 1)) throw std::domain_error("port_split must lie in [0, 1]");
  if (statistics == Statistics::thermal) {
    if (mode_weights.empty()) throw std::domain_error("mode_weights must not be empty");
    double sum = 0;
    for (double w : mode_weights) {
      if (!(w >= 0)) throw std::domain_error("mode weights must be non-negative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::domain_error("mode weights must sum to 1");
    if (mode_weights.size() > 255) throw std::domain_error("at most 255 modes");
  }
  for (int c : channel_pairs)
    if (c < 0 || c > 65535) throw std::domain_error("channel pair index out of range");
}

double rate_from_power(double coefficient, double power) {
  if (coefficient < 0 || power < 0) throw std::domain_error("coefficient and power must be non-negative");
  return coefficient * power * power;
}

namespace {

// Logarithmic (log-series) variate, Kemp's LK algorithm.
std::uint32_t log_series(Rng& rng, double p) {
  if (p <= 0) return 1;
  const double r = std::log1p(-p);
  for (;;) {
    const double v = uniform01(rng);
    if (v >= p) return 1;
    const double q = -std::expm1(r * uniform01(rng));
    if (v <= q * q) {
      const double x = std::floor(1.0 + std::log(v) / std::log(q));
      if (x < 1 || v == 0) continue;
      return static_cast<std::uint32_t>(x);
    }
    return v >= q ? 1 : 2;
  }
}

struct WorkItem {
  int channel = 0;
  int mode = 0;
  std::size_t block = 0;
};

struct MarkProbabilities {
  double any = 0;
  double both = 0;         // P(both | any)
  double signal_only = 0;  // P(signal only | any)
};

MarkProbabilities mark_probabilities(ArmSurvival s) {
  if (!(s.signal >= 0 && s.signal <= 1 && s.idler >= 0 && s.idler <= 1))
    throw std::domain_error("survival probabilities must lie in [0, 1]");
  MarkProbabilities m;
  m.any = 1.0 - (1.0 - s.signal) * (1.0 - s.idler);
  if (m.any > 0) {
    m.both = s.signal * s.idler / m.any;
    m.signal_only = s.signal * (1.0 - s.idler) / m.any;
  }
  return m;
}

void emit_pair(std::vector<PairEvent>& out, Rng& rng, const WorkItem& item, double t, double gamma,
               const MarkProbabilities& marks) {
  PairEvent e;
  e.t_create = t;
  e.channel_pair = static_cast<std::uint16_t>(item.channel);
  e.mode_index = static_cast<std::uint8_t>(item.mode);
  const double u = uniform01(rng);
  if (u < marks.both)
    e.present = kSignalPresent | kIdlerPresent;
  else if (u < marks.both + marks.signal_only)
    e.present = kSignalPresent;
  else
    e.present = kIdlerPresent;
  e.t_signal_exit = e.has_signal() ? t + exponential(rng, gamma) : t;
  e.t_idler_exit = e.has_idler() ? t + exponential(rng, gamma) : t;
  out.push_back(e);
}

std::vector<PairEvent> run_item(const SourceSpec& spec, const WorkItem& item, const MarkProbabilities& marks) {
  std::vector<PairEvent> out;
  const double t0 = static_cast<double>(item.block) * kBlockSeconds;
  const double t1 = std::min(t0 + kBlockSeconds, spec.duration);
  if (!(t1 > t0) || marks.any <= 0) return out;

  Rng rng = make_substream(spec.rng_seed, {tag(Stream::source), static_cast<std::uint64_t>(item.channel),
                                           static_cast<std::uint64_t>(item.mode), item.block});
  const double gamma = spec.gamma();

  if (spec.statistics == Statistics::poissonian) {
    const double rate = spec.pair_rate_per_channel * marks.any;
    if (rate <= 0) return out;
    out.reserve(static_cast<std::size_t>(rate * (t1 - t0) * 1.1) + 16);
    for (double t = t0 + exponential(rng, rate); t < t1; t += exponential(rng, rate))
      emit_pair(out, rng, item, t, gamma, marks);
    return out;
  }

  const double mode_rate = spec.pair_rate_per_channel * spec.mode_weights[static_cast<std::size_t>(item.mode)];
  if (mode_rate <= 0) return out;
  // Thinned occupation of one coherence cell, cells arrive at gamma / 2.
  const double mu = marks.any * 2.0 * mode_rate / gamma;
  const double q = mu / (1.0 + mu);
  const double epoch_rate = 0.5 * gamma * std::log1p(mu);
  out.reserve(static_cast<std::size_t>(marks.any * mode_rate * (t1 - t0) * 1.1) + 16);
  for (double t = t0 + exponential(rng, epoch_rate); t < t1; t += exponential(rng, epoch_rate)) {
    const std::uint32_t size = log_series(rng, q);
    for (std::uint32_t j = 0; j < size; ++j) emit_pair(out, rng, item, t, gamma, marks);
  }
  return out;
}

std::vector<WorkItem> work_items(const SourceSpec& spec) {
  std::vector<WorkItem> items;
  if (!(spec.duration > 0)) return items;
  const auto blocks = static_cast<std::size_t>(std::ceil(spec.duration / kBlockSeconds));
  const int modes = spec.statistics == Statistics::thermal ? static_cast<int>(spec.mode_weights.size()) : 1;
  for (int c : spec.channel_pairs)
    for (int k = 0; k < modes; ++k)
      for (std::size_t b = 0; b < blocks; ++b) items.push_back({c, k, b});
  return items;
}

std::vector<PairEvent> merge(std::vector<std::vector<PairEvent>>& parts) {
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  std::vector<PairEvent> out;
  out.reserve(total);
  for (auto& p : parts) {
    out.insert(out.end(), p.begin(), p.end());
    std::vector<PairEvent>().swap(p);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const PairEvent& a, const PairEvent& b) { return a.t_create < b.t_create; });
  return out;
}

}  // namespace

std::vector<PairEvent> generate_pairs_serial(const SourceSpec& spec, ArmSurvival survival) {
  spec.validate();
  const auto marks = mark_probabilities(survival);
  const auto items = work_items(spec);
  std::vector<std::vector<PairEvent>> parts(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) parts[i] = run_item(spec, items[i], marks);
  return merge(parts);
}

std::vector<PairEvent> generate_pairs(const SourceSpec& spec, ArmSurvival survival) {
  spec.validate();
  const auto marks = mark_probabilities(survival);
  const auto items = work_items(spec);
  std::vector<std::vector<PairEvent>> parts(items.size());
  const auto n = static_cast<std::ptrdiff_t>(items.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    parts[static_cast<std::size_t>(i)] = run_item(spec, items[static_cast<std::size_t>(i)], marks);
  return merge(parts);
}

std::vector<PairEvent> generate_multimode(const SourceSpec& spec, ArmSurvival survival) {
  if (spec.mode_weights.empty()) throw std::domain_error("mode_weights must not be empty");
  SourceSpec s = spec;
  s.statistics = Statistics::thermal;
  return generate_pairs(s, survival);
}

void assign_ports(std::span<PairEvent> events, double port_split, std::uint64_t seed) {
  if (!(port_split >= 0 && port_split <= 1)) throw std::domain_error("port_split must lie in [0, 1]");
  Rng rng = make_substream(seed, {tag(Stream::ports)});
  for (auto& e : events) {
    e.signal_port = uniform01(rng) < port_split ? Port::drop : Port::through;
    e.idler_port = uniform01(rng) < port_split ? Port::drop : Port::through;
  }
}

PortCensus port_census(std::span<const PairEvent> events) {
  PortCensus c;
  for (const auto& e : events) {
    if (e.signal_port != e.idler_port)
      ++c.different;
    else if (e.signal_port == Port::drop)
      ++c.both_drop;
    else
      ++c.both_through;
  }
  return c;
}

double total_comb_rate(const SourceSpec& spec, int n_channels) {
  if (n_channels < 1) throw std::domain_error("n_channels must be at least 1");
  return n_channels * spec.pair_rate_per_channel;
}

std::vector<double> arrivals(std::span<const PairEvent> events, Arm arm, ArrivalFilter filter) {
  std::vector<double> out;
  for (const auto& e : events) {
    if (filter.channel_pair >= 0 && e.channel_pair != filter.channel_pair) continue;
    const bool present = arm == Arm::signal ? e.has_signal() : e.has_idler();
    if (!present) continue;
    const Port port = arm == Arm::signal ? e.signal_port : e.idler_port;
    if (filter.port >= 0 && static_cast<int>(port) != filter.port) continue;
    out.push_back(arm == Arm::signal ? e.t_signal_exit : e.t_idler_exit);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace qcomb::source
