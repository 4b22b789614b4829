#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <map>

#include "oracles/oracles.hpp"
#include "qcomb/correlation_analysis.hpp"
#include "qcomb/detector_chain.hpp"
#include "qcomb/pair_source.hpp"

using namespace qcomb;
using namespace qcomb::source;

namespace {

SourceSpec one_channel(double rate, double duration, std::uint64_t seed) {
  SourceSpec s;
  s.pair_rate_per_channel = rate;
  s.duration = duration;
  s.rng_seed = seed;
  return s;
}

double hbt_g2_zero(const std::vector<double>& weights, std::uint64_t seed) {
  auto s = one_channel(2e7, 0.15, seed);
  s.mode_weights = weights;
  const auto ev = generate_multimode(s, {1.0, 0.0});
  const auto photons = arrivals(ev, Arm::signal);
  auto rng = make_substream(seed, {99});
  const auto [a, b] = detector::beam_splitter(photons, 0.5, rng);
  const auto det = detector::DetectorSpec::ideal();
  auto ra = make_substream(seed, {1}), rb = make_substream(seed, {2});
  const auto ta = detector::detect(a, det, s.duration, ra, 0);
  const auto tb = detector::detect(b, det, s.duration, rb, 1);
  analysis::HbtOptions o;
  return analysis::hbt_autocorrelation(ta, tb, o).g2_zero;
}

}  // namespace

TEST_SUITE("pair_source") {

TEST_CASE("rate from power") {
  const SourceSpec s;
  CHECK(rate_from_power(s.rate_coefficient, 0.030) == doctest::Approx(3.0e5));
  CHECK(s.rate_coefficient == doctest::Approx(3.33e8).epsilon(0.002));
  CHECK(rate_from_power(1e8, 0) == 0.0);
  CHECK(rate_from_power(1e8, 0.06) == doctest::Approx(4 * rate_from_power(1e8, 0.03)));
  CHECK_THROWS_AS(rate_from_power(-1, 0.03), std::domain_error);
}

TEST_CASE("empty and invalid specs") {
  CHECK(generate_pairs(one_channel(3e5, 0, 1)).empty());
  CHECK_THROWS_AS(generate_pairs(one_channel(-1, 1, 1)), std::domain_error);
  auto s = one_channel(3e5, 1, 1);
  s.mode_weights = {0.5, 0.4};
  CHECK_THROWS_AS(generate_pairs(s), std::domain_error);
  s.mode_weights.clear();
  CHECK_THROWS_AS(generate_multimode(s), std::domain_error);
}

TEST_CASE("event count is Poisson around R T") {
  for (auto stats : {Statistics::poissonian, Statistics::thermal}) {
    auto s = one_channel(3e5, 1, 11);
    s.statistics = stats;
    s.mode_weights = {1.0};
    const auto n = static_cast<double>(generate_pairs(s).size());
    CHECK(std::abs(n - 3e5) < 3 * std::sqrt(3e5));
  }
}

TEST_CASE("events are ordered and exit after creation") {
  auto s = one_channel(3e5, 0.2, 3);
  s.channel_pairs = {1, 2, 3};
  const auto ev = generate_pairs(s);
  REQUIRE(!ev.empty());
  CHECK(std::is_sorted(ev.begin(), ev.end(), [](const PairEvent& a, const PairEvent& b) { return a.t_create < b.t_create; }));
  for (const auto& e : ev) {
    REQUIRE(e.t_signal_exit >= e.t_create);
    REQUIRE(e.t_idler_exit >= e.t_create);
  }
}

TEST_CASE("signal-idler delay is Laplace(gamma): KS below 0.01") {
  auto s = one_channel(3e5, 4, 21);
  const auto ev = generate_pairs(s);
  REQUIRE(ev.size() >= 1000000);
  std::vector<double> d;
  d.reserve(ev.size());
  for (const auto& e : ev) d.push_back(e.t_signal_exit - e.t_idler_exit);
  std::sort(d.begin(), d.end());
  const double gamma = 2 * oracle::kPi * 110e6;
  double ks = 0;
  const double n = static_cast<double>(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double f = oracle::laplace_cdf(d[i], gamma);
    ks = std::max({ks, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  CHECK(ks < 0.01);
}

TEST_CASE("cluster sizes follow the log-series law") {
  // One mode at high occupancy; pairs of one cluster share their creation time.
  auto s = one_channel(3e8, 0.02, 5);
  s.mode_weights = {1.0};
  const auto ev = generate_pairs(s);
  std::map<int, double> sizes;
  double clusters = 0;
  for (std::size_t i = 0; i < ev.size();) {
    std::size_t j = i;
    while (j < ev.size() && ev[j].t_create == ev[i].t_create) ++j;
    sizes[static_cast<int>(j - i)] += 1;
    clusters += 1;
    i = j;
  }
  const double mu = 2 * 3e8 / s.gamma();
  const double q = mu / (1 + mu);
  double pk = q / -std::log1p(-q);
  for (int k = 1; k <= 6; ++k) {
    const double expected = clusters * pk;
    CHECK_MESSAGE(std::abs(sizes[k] - expected) < 4 * std::sqrt(expected) + 1, "k=" << k);
    pk *= q * k / (k + 1.0);
  }
}

TEST_CASE("serial and parallel generation are bit-identical and seed-determined") {
  auto s = one_channel(1e6, 0.3, 77);
  s.channel_pairs = {1, 2, 3, 4, 5};
  const auto a = generate_pairs(s, {0.3, 0.6});
  const auto b = generate_pairs_serial(s, {0.3, 0.6});
  REQUIRE(a.size() == b.size());
  CHECK(std::equal(a.begin(), a.end(), b.begin(), [](const PairEvent& x, const PairEvent& y) {
    return x.t_create == y.t_create && x.t_signal_exit == y.t_signal_exit && x.t_idler_exit == y.t_idler_exit &&
           x.channel_pair == y.channel_pair && x.mode_index == y.mode_index && x.present == y.present;
  }));
  s.rng_seed = 78;
  const auto c = generate_pairs(s, {0.3, 0.6});
  CHECK((c.size() != a.size() || c.front().t_create != a.front().t_create));
}

TEST_CASE("folded survival thins each arm independently") {
  auto s = one_channel(1e6, 1, 8);
  const double ps = 0.3, pi = 0.6;
  const auto ev = generate_pairs(s, {ps, pi});
  double ns = 0, ni = 0, nb = 0;
  for (const auto& e : ev) {
    ns += e.has_signal();
    ni += e.has_idler();
    nb += e.has_signal() && e.has_idler();
    REQUIRE((e.has_signal() || e.has_idler()));
  }
  auto within = [](double x, double mean) { return std::abs(x - mean) < 4 * std::sqrt(mean); };
  CHECK(within(ns, 1e6 * ps));
  CHECK(within(ni, 1e6 * pi));
  CHECK(within(nb, 1e6 * ps * pi));
}

TEST_CASE("port assignment") {
  auto ev = generate_pairs(one_channel(1e5, 1, 4));
  REQUIRE(ev.size() > 90000);
  assign_ports(ev, 1.0, 1);
  CHECK(port_census(ev).both_drop == ev.size());
  assign_ports(ev, 0.0, 1);
  CHECK(port_census(ev).both_through == ev.size());
  assign_ports(ev, 0.5, 1);
  const auto c = port_census(ev);
  const double n = static_cast<double>(c.total());
  CHECK(std::abs(c.different / n - 0.5) < 3 * std::sqrt(0.25 / n));
  CHECK(std::abs(c.both_drop / n - 0.25) < 3 * std::sqrt(0.25 * 0.75 / n));
  CHECK(std::abs(c.both_through / n - 0.25) < 3 * std::sqrt(0.25 * 0.75 / n));
  CHECK_THROWS_AS(assign_ports(ev, 1.5, 1), std::domain_error);

  const auto drop_signals = arrivals(ev, Arm::signal, {-1, static_cast<int>(Port::drop)});
  const auto all_signals = arrivals(ev, Arm::signal);
  CHECK(drop_signals.size() < all_signals.size());
  CHECK(std::is_sorted(all_signals.begin(), all_signals.end()));
}

TEST_CASE("total comb rate") {
  SourceSpec s;
  CHECK(total_comb_rate(s, 80) == doctest::Approx(2.4e7));
  CHECK(total_comb_rate(s, 1) == s.pair_rate_per_channel);
  s.pair_rate_per_channel = 0;
  CHECK(total_comb_rate(s, 5) == 0.0);
  CHECK_THROWS(total_comb_rate(s, 0));
}

TEST_CASE("cross-correlation excess equals pi dnu / R") {
  auto s = one_channel(3e5, 4, 31);
  const auto ev = generate_pairs(s);
  const auto det = detector::DetectorSpec::ideal();
  auto r1 = make_substream(1, {1}), r2 = make_substream(1, {2});
  const auto a = detector::detect(arrivals(ev, Arm::signal), det, s.duration, r1, 0);
  const auto b = detector::detect(arrivals(ev, Arm::idler), det, s.duration, r2, 1);
  analysis::HistogramOptions o;
  o.range = 6173;
  const auto fit = analysis::fit_g2(analysis::cross_histogram(a, b, o), 0.0);
  REQUIRE(fit.ok);
  CHECK(fit.contrast() == doctest::Approx(oracle::kPi * 110e6 / 3e5).epsilon(0.05));
}

TEST_CASE("multimode bunching: g2(0) = 1 + sum p^2") {
  CHECK(hbt_g2_zero({1.0}, 1) == doctest::Approx(2.0).epsilon(0.05 / 2.0));
  CHECK(hbt_g2_zero({0.5, 0.5}, 2) == doctest::Approx(1.5).epsilon(0.03 / 1.5));
  CHECK(hbt_g2_zero({0.637, 0.363}, 3) == doctest::Approx(1.537).epsilon(0.03 / 1.537));
}

TEST_CASE("coherent emission shows no bunching") {
  auto s = one_channel(2e7, 0.1, 9);
  s.statistics = Statistics::poissonian;
  const auto ev = generate_pairs(s, {1.0, 0.0});
  auto rng = make_substream(9, {99});
  const auto [a, b] = detector::beam_splitter(arrivals(ev, Arm::signal), 0.5, rng);
  const auto det = detector::DetectorSpec::ideal();
  auto ra = make_substream(9, {1}), rb = make_substream(9, {2});
  const auto res = analysis::hbt_autocorrelation(detector::detect(a, det, s.duration, ra, 0),
                                                 detector::detect(b, det, s.duration, rb, 1), {});
  CHECK(std::abs(res.g2_zero - 1.0) < 0.05);
  CHECK_FALSE(res.n_defined);
}

}
