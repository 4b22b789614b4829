#include "qcomb/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qcomb/rng.hpp"
#include "qcomb/timetag_file.hpp"

namespace qcomb::scenario {

namespace {

using config::ExperimentConfig;
using config::Scenario;

// Substream purposes local to scenario orchestration.
constexpr std::uint64_t kPointTag = 101;
constexpr std::uint64_t kSwapTag = 102;

double fit_sigma(const detector::DetectorSpec& a, const detector::DetectorSpec& b) {
  return std::sqrt(0.5 * (a.jitter_sigma * a.jitter_sigma + b.jitter_sigma * b.jitter_sigma));
}

Ticks to_ticks(double seconds, double tick) { return static_cast<Ticks>(std::llround(seconds / tick)); }

analysis::FitOptions fit_options(const ExperimentConfig& cfg) {
  analysis::FitOptions fo;
  fo.fit_half_width = cfg.analysis.fit_half_width;
  return fo;
}

analysis::HistogramOptions hist_options(const ExperimentConfig& cfg, double tick) {
  analysis::HistogramOptions ho;
  ho.bin_width = cfg.analysis.bin_ticks;
  ho.range = to_ticks(cfg.analysis.range, tick);
  return ho;
}

// Fraction of the singles that are dark counts, after dead-time losses.
double dark_fraction(double singles, const detector::DetectorSpec& d) {
  if (!(singles > 0)) return 0.0;
  const double live = std::max(0.0, 1.0 - singles * d.dead_time);
  return std::min(1.0, detector::intrinsic_dark_rate(d) * live / singles);
}

void analyze_channel(const ExperimentConfig& cfg, ChannelRun& run) {
  run.histogram = analysis::cross_histogram(run.signal, run.idler, hist_options(cfg, run.signal.tick));
  run.fit = analysis::fit_g2(run.histogram, fit_sigma(cfg.det_signal, cfg.det_idler), fit_options(cfg));
  run.car = analysis::compute_car(run.histogram, run.fit, cfg.analysis.far_offset);
  const double qe_s = cfg.det_signal.quantum_efficiency;
  const double qe_i = cfg.det_idler.quantum_efficiency;
  if (run.car.singles_start > 0)
    run.heralding_efficiency = analysis::heralded_efficiency(run.car.coincidence_rate, run.car.singles_start, qe_i);
  run.backout = analysis::backout_pair_rate(run.car, cfg.path_signal, cfg.path_idler, qe_s, qe_i);
  run.backout_singles =
      analysis::backout_from_singles(run.car.singles_start, cfg.det_signal.dark_rate, cfg.path_signal, qe_s);
  const double fs = dark_fraction(run.car.singles_start, cfg.det_signal);
  const double fi = dark_fraction(run.car.singles_stop, cfg.det_idler);
  run.dark_share = 1.0 - (1.0 - fs) * (1.0 - fi);
}

source::SourceSpec source_for(const ExperimentConfig& cfg, std::vector<int> orders, double power, double duration,
                              std::uint64_t seed) {
  source::SourceSpec spec = cfg.source;
  spec.channel_pairs = std::move(orders);
  spec.pump_power = power;
  spec.pair_rate_per_channel = cfg.pair_rate(power);
  spec.duration = duration;
  spec.rng_seed = derive_seed(seed, {tag(Stream::source)});
  return spec;
}

detector::DetectorSpec without_qe(detector::DetectorSpec d, double folded) {
  d.quantum_efficiency = folded > 0 ? std::min(1.0, d.quantum_efficiency / folded) : 1.0;
  return d;
}

// Lossless, unit-efficiency detector keeping the timing resolution of the configured one.
detector::DetectorSpec timing_only(const detector::DetectorSpec& d) {
  auto ideal = detector::DetectorSpec::ideal(d.tick);
  ideal.jitter_sigma = d.jitter_sigma;
  return ideal;
}

std::string pair_key(int order) { return "s" + std::to_string(order) + "i" + std::to_string(order); }

std::string mhz(double hz) { return report::format_number(hz / 1e6); }

class BundleWriter {
 public:
  explicit BundleWriter(const std::filesystem::path& dir) {
    bundle_.dir = dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  }

  report::Report& report() { return bundle_.report; }

  void text(const std::string& name, const std::string& bytes) {
    bundle_.files.emplace_back(name, report::write_file(bundle_.dir / name, bytes));
  }
  void table(const std::string& name, const report::Table& t) { text(name, t.to_tsv()); }
  void tags(const std::string& name, const std::vector<detector::TimeTagStream>& streams) {
    const auto bytes = io::encode_timetags(streams);
    text(name, std::string(bytes.begin(), bytes.end()));
  }

  Bundle finish() {
    for (const auto& [name, digest] : bundle_.files) bundle_.report.set("sha256." + name, digest);
    report::write_file(bundle_.dir / "report.txt", bundle_.report.to_text());
    return std::move(bundle_);
  }

 private:
  Bundle bundle_;
};

void add_channel(report::Report& r, const ChannelRun& run) {
  const std::string p = pair_key(run.order);
  r.set(p + ".singles_signal_hz", run.car.singles_start);
  r.set(p + ".singles_idler_hz", run.car.singles_stop);
  add_fit(r, p + ".fit", run.fit);
  add_car(r, p + ".car", run.car);
  r.set(p + ".heralding_efficiency", run.heralding_efficiency);
  r.set(p + ".backout_pair_rate_hz", run.backout);
  r.set(p + ".backout_singles_hz", run.backout_singles);
  r.set(p + ".dark_share", run.dark_share);
}

void write_comb(BundleWriter& w, const ExperimentConfig& cfg, const CombRun& comb, bool per_channel_tables) {
  auto& r = w.report();
  r.set("pump_power_w", comb.pump_power);
  r.set("pair_rate_per_channel_hz", comb.pair_rate);
  // R is taken at the drop-port fiber; the on-chip items give the in-ring figure.
  r.set("pair_rate_in_ring_hz", comb.pair_rate / cfg.path_source_side.transmission());
  r.set("total_comb_rate_80ch_hz", source::total_comb_rate(cfg.source, 80));
  const auto grid = cfg.channel_grid();
  std::vector<detector::TimeTagStream> streams;
  bool low = comb.channels.empty();
  for (const auto& run : comb.channels) {
    const auto& cp = grid.pairs.at(static_cast<std::size_t>(run.order - 1));
    r.set(pair_key(run.order) + ".signal_channel", cp.signal.label());
    r.set(pair_key(run.order) + ".idler_channel", cp.idler.label());
    add_channel(r, run);
    low = low || run.car.low_statistics;
    streams.push_back(run.signal);
    streams.push_back(run.idler);
    if (per_channel_tables) w.table("hist_" + pair_key(run.order) + ".tsv", histogram_table(run.histogram));
  }
  r.set("low_statistics", low);
  w.tags("tags.qtt", streams);
}

}  // namespace

report::Table histogram_table(const analysis::CoincidenceHistogram& h) {
  report::Table t;
  t.columns = {"tau_s", "counts"};
  for (std::size_t i = 0; i < h.size(); ++i) t.add_row({h.tau(i), static_cast<double>(h.counts[i])});
  return t;
}

void add_fit(report::Report& r, const std::string& p, const analysis::G2FitResult& f) {
  r.set(p + ".ok", f.ok);
  if (!f.diagnostics.empty()) r.set(p + ".diagnostics", f.diagnostics);
  r.set(p + ".floor_counts_per_bin", f.floor);
  r.set(p + ".amplitude_counts_per_bin", f.amplitude);
  r.set(p + ".amplitude_sigma_counts_per_bin", f.amplitude_sigma);
  r.set(p + ".delta_nu_fit_mhz", mhz(f.delta_nu_fit));
  r.set(p + ".delta_nu_corr_mhz", mhz(f.delta_nu_corr));
  r.set(p + ".tau_coh_s", f.delta_nu_corr > 0 ? 1.0 / (M_PI * f.delta_nu_corr) : 0.0);
  r.set(p + ".tau0_s", f.tau0);
  r.set(p + ".fwhm_s", f.fwhm);
  r.set(p + ".fwhm_raw_s", f.fwhm_raw);
  r.set(p + ".jitter_sigma_s", f.jitter_sigma);
  r.set(p + ".contrast", f.contrast());
  r.set(p + ".residual_norm", f.residual_norm);
}

void add_car(report::Report& r, const std::string& p, const analysis::CarReport& c) {
  r.set(p + ".cc_counts", static_cast<long long>(c.cc));
  r.set(p + ".ac_counts", c.ac);
  r.set(p + ".ac_windows", static_cast<long long>(c.ac_windows));
  r.set(p + ".car", c.car_defined ? report::format_number(c.car) : std::string("inf"));
  r.set(p + ".window_s", c.window_width);
  r.set(p + ".coincidence_rate_hz", c.coincidence_rate);
  r.set(p + ".duration_s", c.duration);
  r.set(p + ".low_statistics", c.low_statistics);
}

void add_heralded(report::Report& r, const std::string& p, const analysis::HeraldedReport& h) {
  r.set(p + ".g_h_zero", h.g_h_zero);
  r.set(p + ".uncertainty", h.uncertainty);
  r.set(p + ".herald_window_s", h.herald_window);
  r.set(p + ".n_heralds", static_cast<long long>(h.n_heralds));
  r.set(p + ".n_a", static_cast<long long>(h.n_a));
  r.set(p + ".n_b", static_cast<long long>(h.n_b));
  r.set(p + ".n_triples", static_cast<long long>(h.n_triples));
  r.set(p + ".literal_ratio", h.literal_ratio);
  r.set(p + ".low_statistics", h.low_statistics);
}

namespace {

// Generation and detection only; the caller runs the analysis.
CombRun detect_comb(const ExperimentConfig& cfg, const std::vector<int>& orders, double pump_power, double duration,
                    std::uint64_t seed) {
  CombRun comb;
  comb.duration = duration;
  comb.pump_power = pump_power;
  comb.pair_rate = cfg.pair_rate(pump_power);
  const auto spec = source_for(cfg, orders, pump_power, duration, seed);
  // Optical loss and detector efficiency are drawn at generation.
  const double p_s = cfg.path_signal.transmission() * cfg.det_signal.quantum_efficiency;
  const double p_i = cfg.path_idler.transmission() * cfg.det_idler.quantum_efficiency;
  const auto events = source::generate_pairs(spec, {p_s, p_i});
  const auto det_s = without_qe(cfg.det_signal, cfg.det_signal.quantum_efficiency);
  const auto det_i = without_qe(cfg.det_idler, cfg.det_idler.quantum_efficiency);

  comb.channels.resize(orders.size());
  const auto n = static_cast<std::ptrdiff_t>(orders.size());
#if QCOMB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const int m = orders[static_cast<std::size_t>(k)];
    ChannelRun& run = comb.channels[static_cast<std::size_t>(k)];
    run.order = m;
    auto rng_s = make_substream(seed, {tag(Stream::detector), static_cast<std::uint64_t>(m), 0});
    auto rng_i = make_substream(seed, {tag(Stream::detector), static_cast<std::uint64_t>(m), 1});
    run.signal = detector::detect(source::arrivals(events, source::Arm::signal, {m, -1}), det_s, duration, rng_s,
                                  signal_channel_id(m));
    run.idler = detector::detect(source::arrivals(events, source::Arm::idler, {m, -1}), det_i, duration, rng_i,
                                 idler_channel_id(m));
  }
  return comb;
}

void append_slice(detector::TimeTagStream& to, const detector::TimeTagStream& from, Ticks slice_ticks, std::size_t index) {
  for (Ticks t : from.tags)
    if (t < slice_ticks) to.tags.push_back(t + static_cast<Ticks>(index) * slice_ticks);
}

}  // namespace

CombRun simulate_comb(const ExperimentConfig& cfg, const std::vector<int>& orders, double pump_power, double duration,
                      std::uint64_t seed) {
  auto comb = detect_comb(cfg, orders, pump_power, duration, seed);
  const auto n = static_cast<std::ptrdiff_t>(comb.channels.size());
#if QCOMB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t k = 0; k < n; ++k) analyze_channel(cfg, comb.channels[static_cast<std::size_t>(k)]);
  return comb;
}

SweepResult car_vs_power(const ExperimentConfig& cfg) {
  SweepResult out;
  std::vector<double> powers = cfg.sweep.powers;
  std::sort(powers.begin(), powers.end());
  const double p_s = cfg.path_signal.transmission() * cfg.det_signal.quantum_efficiency;
  const double p_i = cfg.path_idler.transmission() * cfg.det_idler.quantum_efficiency;
  const double p_any = 1.0 - (1.0 - p_s) * (1.0 - p_i);
  const double tick = cfg.det_signal.tick;
  for (std::size_t k = 0; k < powers.size(); ++k) {
    SweepPoint pt;
    pt.power = powers[k];
    // Consecutive independent slices of at most max_events photon events each.
    const double duration = cfg.scenario_duration();
    const double events = cfg.pair_rate(pt.power) * p_any * duration;
    const auto slices = static_cast<std::size_t>(std::max(1.0, std::ceil(events / cfg.sweep.max_events)));
    const auto slice_ticks = static_cast<Ticks>(std::ceil(duration / tick / static_cast<double>(slices)));
    const double slice = static_cast<double>(slice_ticks) * tick;
    pt.duration = slice * static_cast<double>(slices);
    ChannelRun& run = pt.run;
    run.order = cfg.channel_pair;
    run.signal = {signal_channel_id(run.order), {}, tick, pt.duration};
    run.idler = {idler_channel_id(run.order), {}, tick, pt.duration};
    for (std::size_t j = 0; j < slices; ++j) {
      const auto seed = derive_seed(*cfg.seed, {kPointTag, k, j});
      const auto part = detect_comb(cfg, {run.order}, pt.power, slice, seed);
      append_slice(run.signal, part.channels.front().signal, slice_ticks, j);
      append_slice(run.idler, part.channels.front().idler, slice_ticks, j);
    }
    analyze_channel(cfg, run);
    out.points.push_back(std::move(pt));
  }
  out.strictly_decreasing = out.points.size() >= 2;
  for (std::size_t k = 1; k < out.points.size(); ++k)
    if (!(out.points[k].run.car.car < out.points[k - 1].run.car.car)) out.strictly_decreasing = false;

  // Least squares of ln(CAR - 1) on ln P where dark counts hold under 10% of the accidentals.
  std::vector<std::pair<double, double>> xy;
  for (const auto& pt : out.points) {
    const auto& c = pt.run.car;
    if (c.car_defined && c.car > 1 && pt.run.dark_share < 0.1) xy.emplace_back(std::log(pt.power), std::log(c.car - 1));
  }
  out.slope_points = static_cast<int>(xy.size());
  if (xy.size() >= 2) {
    double mx = 0, my = 0;
    for (auto [x, y] : xy) mx += x, my += y;
    mx /= static_cast<double>(xy.size());
    my /= static_cast<double>(xy.size());
    double sxy = 0, sxx = 0;
    for (auto [x, y] : xy) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
    out.slope = sxx > 0 ? sxy / sxx : 0.0;
  }
  return out;
}

HbtRun run_hbt(const ExperimentConfig& cfg) {
  HbtRun out;
  out.duration = cfg.scenario_duration();
  const std::uint64_t seed = *cfg.seed;
  const auto spec = source_for(cfg, {cfg.channel_pair}, cfg.hbt_pump_power, out.duration, seed);
  const auto events = source::generate_pairs(spec, {0.0, 1.0});
  const auto photons = source::arrivals(events, source::Arm::idler);
  auto rng_split = make_substream(seed, {tag(Stream::splitter)});
  const auto [to_a, to_b] = detector::beam_splitter(photons, cfg.hbt_ratio, rng_split);
  const auto det = timing_only(cfg.det_idler);
  auto rng_a = make_substream(seed, {tag(Stream::detector), 0});
  auto rng_b = make_substream(seed, {tag(Stream::detector), 1});
  out.a = detector::detect(to_a, det, out.duration, rng_a, 0);
  out.b = detector::detect(to_b, det, out.duration, rng_b, 1);
  analysis::HbtOptions ho;
  ho.bin_width = cfg.analysis.bin_ticks;
  ho.jitter_sigma = det.jitter_sigma;
  out.result = analysis::hbt_autocorrelation(out.a, out.b, ho);
  return out;
}

HeraldedRun run_heralded(const ExperimentConfig& cfg) {
  HeraldedRun out;
  out.duration = cfg.scenario_duration();
  const std::uint64_t seed = *cfg.seed;
  const auto spec = source_for(cfg, {cfg.channel_pair}, cfg.source.pump_power, out.duration, seed);
  const double qe_i = std::max(cfg.det_herald_a.quantum_efficiency, cfg.det_herald_b.quantum_efficiency);
  const double p_s = cfg.path_signal.transmission() * cfg.det_signal.quantum_efficiency;
  const double p_i = cfg.path_idler.transmission() * qe_i;
  const auto events = source::generate_pairs(spec, {p_s, p_i});

  auto rng_s = make_substream(seed, {tag(Stream::detector), 0});
  out.signal = detector::detect(source::arrivals(events, source::Arm::signal), without_qe(cfg.det_signal, cfg.det_signal.quantum_efficiency),
                                out.duration, rng_s, 0);
  const auto triggers = detector::to_seconds(out.signal);
  auto rng_split = make_substream(seed, {tag(Stream::splitter)});
  const auto [to_a, to_b] = detector::beam_splitter(source::arrivals(events, source::Arm::idler), cfg.hbt_ratio, rng_split);
  auto rng_a = make_substream(seed, {tag(Stream::detector), 1});
  auto rng_b = make_substream(seed, {tag(Stream::detector), 2});
  out.idler_a = detector::detect_gated(to_a, without_qe(cfg.det_herald_a, qe_i), triggers, out.duration, rng_a, 1);
  out.idler_b = detector::detect_gated(to_b, without_qe(cfg.det_herald_b, qe_i), triggers, out.duration, rng_b, 2);

  analysis::HeraldedOptions ho;
  ho.herald_window = cfg.analysis.herald_window;
  out.report = analysis::heralded_g2(out.signal, out.idler_a, out.idler_b, ho);
  return out;
}

FourPortRun run_fourport(const ExperimentConfig& cfg) {
  FourPortRun out;
  out.duration = cfg.scenario_duration();
  const std::uint64_t seed = *cfg.seed;
  const int m = cfg.channel_pair;
  const auto spec = source_for(cfg, {m}, cfg.source.pump_power, out.duration, seed);
  auto events = source::generate_pairs(spec);
  source::assign_ports(events, cfg.source.port_split, derive_seed(seed, {tag(Stream::ports)}));
  out.census = source::port_census(events);

  const auto det_s = timing_only(cfg.det_signal);
  const auto det_i = timing_only(cfg.det_idler);
  const double sigma = fit_sigma(det_s, det_i);
  const int drop = static_cast<int>(source::Port::drop);
  const int through = static_cast<int>(source::Port::through);

  auto run = [&](int signal_port, int idler_port, std::uint64_t sub, analysis::CoincidenceHistogram& hist,
                 analysis::G2FitResult& fit) {
    auto rng_s = make_substream(seed, {tag(Stream::detector), sub, 0});
    auto rng_i = make_substream(seed, {tag(Stream::detector), sub, 1});
    // Drop-port detector on channel 0, through-port detector on channel 1.
    const auto s = detector::detect(source::arrivals(events, source::Arm::signal, {m, signal_port}), det_s,
                                    out.duration, rng_s, signal_port);
    const auto i = detector::detect(source::arrivals(events, source::Arm::idler, {m, idler_port}), det_i,
                                    out.duration, rng_i, idler_port);
    const auto& start = signal_port == drop ? s : i;
    const auto& stop = signal_port == drop ? i : s;
    hist = analysis::cross_histogram(start, stop, hist_options(cfg, s.tick));
    fit = analysis::fit_g2(hist, sigma, fit_options(cfg));
  };
  run(drop, through, 0, out.direct_hist, out.direct_fit);
  run(through, drop, kSwapTag, out.swapped_hist, out.swapped_fit);
  return out;
}

Bundle run_scenario(const ExperimentConfig& cfg) {
  cfg.validate();
  BundleWriter w(cfg.output_dir);
  auto& r = w.report();
  const double duration = cfg.scenario_duration();
  r.set("scenario", config::to_string(cfg.scenario));
  r.set("seed", std::to_string(*cfg.seed));
  r.set("duration_s", duration);
  w.text("config.ini", config::serialize_config(cfg));

  switch (cfg.scenario) {
    case Scenario::pairs_fig2:
    case Scenario::custom: {
      std::vector<int> orders;
      if (cfg.scenario == Scenario::custom)
        orders.push_back(cfg.channel_pair);
      else
        for (int m = 1; m <= cfg.grid.n_pairs; ++m) orders.push_back(m);
      const auto comb = simulate_comb(cfg, orders, cfg.source.pump_power, duration, *cfg.seed);
      write_comb(w, cfg, comb, true);
      break;
    }
    case Scenario::matrix_fig2b: {
      std::vector<int> orders;
      for (int m = 1; m <= cfg.grid.n_pairs; ++m) orders.push_back(m);
      const auto comb = simulate_comb(cfg, orders, cfg.source.pump_power, duration, *cfg.seed);
      write_comb(w, cfg, comb, false);
      std::vector<detector::TimeTagStream> sig, idl;
      for (const auto& ch : comb.channels) {
        sig.push_back(ch.signal);
        idl.push_back(ch.idler);
      }
      analysis::MatrixOptions mo;
      mo.bin_width = cfg.analysis.bin_ticks;
      mo.range = cfg.analysis.range;
      mo.window = cfg.analysis.matrix_window;
      mo.far_offset = cfg.analysis.far_offset;
      const auto mat = analysis::coincidence_matrix(sig, idl, mo);
      report::Table t;
      t.columns = {"signal_order", "idler_order", "significance_sigma", "peak_counts", "accidental_counts"};
      for (std::size_t s = 0; s < mat.n_signal; ++s)
        for (std::size_t i = 0; i < mat.n_idler; ++i) {
          const std::size_t k = s * mat.n_idler + i;
          t.add_row({double(s + 1), double(i + 1), mat.significance[k], double(mat.peak_counts[k]), mat.accidental[k]});
          r.set("matrix.s" + std::to_string(s + 1) + "i" + std::to_string(i + 1) + ".significance_sigma",
                mat.significance[k]);
        }
      w.table("matrix.tsv", t);
      break;
    }
    case Scenario::car_sweep_fig3: {
      const auto sweep = car_vs_power(cfg);
      report::Table t;
      t.columns = {"power_mW", "car"};
      std::vector<detector::TimeTagStream> streams;
      bool low = sweep.points.empty();
      for (const auto& pt : sweep.points) {
        const std::string p = "sweep." + report::format_number(pt.power * 1e3) + "mW";
        r.set(p + ".duration_s", pt.duration);
        r.set(p + ".singles_signal_hz", pt.run.car.singles_start);
        r.set(p + ".singles_idler_hz", pt.run.car.singles_stop);
        r.set(p + ".dark_share", pt.run.dark_share);
        add_fit(r, p + ".fit", pt.run.fit);
        add_car(r, p + ".car", pt.run.car);
        t.add_row({pt.power * 1e3, pt.run.car.car});
        low = low || pt.run.car.low_statistics;
        w.tags("tags_" + report::format_number(pt.power * 1e3) + "mW.qtt", {pt.run.signal, pt.run.idler});
      }
      r.set("sweep.strictly_decreasing", sweep.strictly_decreasing);
      r.set("sweep.slope_car_minus_one", sweep.slope);
      r.set("sweep.slope_points", static_cast<long long>(sweep.slope_points));
      r.set("low_statistics", low);
      w.table("car_vs_power.tsv", t);
      break;
    }
    case Scenario::hbt_fig4a: {
      const auto hbt = run_hbt(cfg);
      const auto& res = hbt.result;
      r.set("pump_power_w", cfg.hbt_pump_power);
      r.set("hbt.singles_a_hz", hbt.a.rate());
      r.set("hbt.singles_b_hz", hbt.b.rate());
      add_fit(r, "hbt.fit", res.fit);
      r.set("hbt.g2_zero", res.g2_zero);
      r.set("hbt.n_modes", res.n_defined ? report::format_number(res.n_modes) : std::string("undefined"));
      r.set("low_statistics", !res.fit.ok);
      w.table("hbt_hist.tsv", histogram_table(res.histogram));
      report::Table g;
      g.columns = {"tau_s", "g2"};
      for (std::size_t i = 0; i < res.g2.size(); ++i) g.add_row({res.histogram.tau(i), res.g2[i]});
      w.table("hbt_g2.tsv", g);
      w.tags("tags.qtt", {hbt.a, hbt.b});
      break;
    }
    case Scenario::heralded_fig4b: {
      const auto h = run_heralded(cfg);
      r.set("heralded.singles_signal_hz", h.signal.rate());
      r.set("heralded.gated_a_hz", h.idler_a.rate());
      r.set("heralded.gated_b_hz", h.idler_b.rate());
      add_heralded(r, "heralded", h.report);
      r.set("low_statistics", h.report.low_statistics);
      report::Table t;
      t.columns = {"tau_s", "g_h"};
      for (std::size_t i = 0; i < h.report.curve_tau.size(); ++i) t.add_row({h.report.curve_tau[i], h.report.curve_g[i]});
      w.table("heralded_curve.tsv", t);
      w.tags("tags.qtt", {h.signal, h.idler_a, h.idler_b});
      break;
    }
    case Scenario::fourport_fig5: {
      const auto fp = run_fourport(cfg);
      const double n = static_cast<double>(fp.census.total());
      r.set("fourport.pairs", static_cast<long long>(fp.census.total()));
      r.set("fourport.different_fraction", n > 0 ? double(fp.census.different) / n : 0.0);
      r.set("fourport.both_drop_fraction", n > 0 ? double(fp.census.both_drop) / n : 0.0);
      r.set("fourport.both_through_fraction", n > 0 ? double(fp.census.both_through) / n : 0.0);
      add_fit(r, "fourport.direct.fit", fp.direct_fit);
      add_fit(r, "fourport.swapped.fit", fp.swapped_fit);
      r.set("low_statistics", !fp.direct_fit.ok || !fp.swapped_fit.ok);
      report::Table t;
      t.columns = {"port_outcome", "fraction"};
      t.add_row({0, n > 0 ? double(fp.census.different) / n : 0.0});
      t.add_row({1, n > 0 ? double(fp.census.both_drop) / n : 0.0});
      t.add_row({2, n > 0 ? double(fp.census.both_through) / n : 0.0});
      w.table("port_census.tsv", t);
      w.table("hist_drop_through.tsv", histogram_table(fp.direct_hist));
      w.table("hist_swapped.tsv", histogram_table(fp.swapped_hist));
      break;
    }
  }
  return w.finish();
}

std::vector<std::string> verify_bundle(const std::filesystem::path& dir) {
  const auto entries = report::read_report(dir / "report.txt");
  std::vector<std::string> bad;
  for (const auto& [k, v] : entries) {
    if (!k.starts_with("sha256.")) continue;
    const std::string name = k.substr(7);
    std::string actual;
    try {
      actual = report::sha256_file(dir / name);
    } catch (const std::exception&) {
      actual.clear();
    }
    if (actual != v) bad.push_back(name);
  }
  return bad;
}

}  // namespace qcomb::scenario
