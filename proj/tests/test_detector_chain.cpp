#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

#include "oracles/oracles.hpp"
#include "qcomb/detector_chain.hpp"
#include "qcomb/histogram.hpp"
#include "qcomb/pair_source.hpp"

using namespace qcomb;
using namespace qcomb::detector;

namespace {

std::vector<double> poisson_times(double rate, double duration, std::uint64_t seed) {
  auto rng = make_substream(seed, {42});
  std::vector<double> t;
  for (double x = exponential(rng, rate); x < duration; x += exponential(rng, rate)) t.push_back(x);
  return t;
}

bool within_3sigma(double count, double mean) { return std::abs(count - mean) <= 3 * std::sqrt(mean); }

}  // namespace

TEST_SUITE("detector_chain") {

TEST_CASE("loss ledgers") {
  CHECK(full_idler_path().total_db() == doctest::Approx(10.5));
  CHECK(std::abs(full_idler_path().total_db() - 10.4) <= 0.1 + 1e-12);
  CHECK(full_signal_path().total_db() == doctest::Approx(10.9));
  CHECK(signal_detection_path().transmission() == doctest::Approx(std::pow(10.0, -0.34)));
  OpticalPath p{{{"a", 1.25}, {"b", 2.5}}};
  CHECK(p.total_db() == 3.75);
  OpticalPath bad{{{"gain", -1.0}}};
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("apply_loss") {
  const auto x = poisson_times(1e6, 1.0, 1);
  auto rng = make_substream(1, {1});
  CHECK(apply_loss(x, OpticalPath{}, rng).size() == x.size());
  const auto kept = apply_loss(x, OpticalPath{{{"ten", 10.0}}}, rng);
  CHECK(within_3sigma(double(kept.size()), 0.1 * double(x.size())));
}

TEST_CASE("beam splitter") {
  const auto x = poisson_times(1e5, 1.0, 2);
  auto rng = make_substream(2, {1});
  auto [a1, b1] = beam_splitter(x, 1.0, rng);
  CHECK(a1.size() == x.size());
  CHECK(b1.empty());
  auto [a, b] = beam_splitter(x, 0.5, rng);
  const double n = double(x.size());
  CHECK(std::abs(double(a.size()) - n / 2) <= 3 * std::sqrt(n / 4));
  std::vector<double> merged;
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged));
  CHECK(merged == x);
  CHECK_THROWS_AS(beam_splitter(x, 1.5, rng), std::domain_error);
}

TEST_CASE("quantize") {
  CHECK(quantize(0, 81e-12) == 0);
  CHECK(quantize(80.9e-12, 81e-12) == 0);
  CHECK(quantize(81.1e-12, 81e-12) == 1);
  CHECK_THROWS_AS(quantize(-1e-12, 81e-12), std::domain_error);
  CHECK(2.9e-9 / 81e-12 == doctest::Approx(36).epsilon(0.01));
}

TEST_CASE("dark counts appear at the observed rate") {
  for (double dark : {1.3e3, 3.4e3}) {
    DetectorSpec d;
    d.dark_rate = dark;
    auto rng = make_substream(3, {static_cast<std::uint64_t>(dark)});
    const auto s = detect({}, d, 10.0, rng);
    CHECK(within_3sigma(double(s.tags.size()), dark * 10));
  }
}

TEST_CASE("dead time blocks a second click") {
  DetectorSpec d = DetectorSpec::ideal();
  d.dead_time = 25e-6;
  const std::vector<double> x{1e-3, 1e-3 + 1e-6};
  auto rng = make_substream(4, {});
  CHECK(detect(x, d, 1.0, rng).tags.size() == 1);
}

TEST_CASE("non-paralyzable rate law") {
  for (double lambda : {1e3, 1e5, 1e7}) {
    DetectorSpec d;
    d.dark_rate = 0;
    d.jitter_sigma = 0;
    const double expected_rate = oracle::nonparalyzable(lambda, d.quantum_efficiency, d.dead_time);
    const double duration = 2e5 / expected_rate;
    const auto x = poisson_times(lambda, duration, 5);
    auto rng = make_substream(5, {1});
    const auto s = detect(x, d, duration, rng);
    CHECK_MESSAGE(s.rate() == doctest::Approx(expected_rate).epsilon(0.01), "lambda=" << lambda);
    CHECK(nonparalyzable_rate(lambda, d.quantum_efficiency, d.dead_time) == doctest::Approx(expected_rate));
    // Stream invariants.
    REQUIRE(std::adjacent_find(s.tags.begin(), s.tags.end(), [&](Ticks a, Ticks b) {
              return static_cast<double>(b - a + 1) * d.tick < d.dead_time;
            }) == s.tags.end());
  }
}

TEST_CASE("zero-loss path does not perturb the detector substream") {
  const auto x = poisson_times(1e5, 0.5, 6);
  DetectorSpec d;
  auto r1 = make_substream(6, {1});
  auto r2 = make_substream(6, {1});
  const auto direct = detect(x, d, 0.5, r1);
  const auto via_loss = detect(apply_loss(x, OpticalPath{}, r2), d, 0.5, r2);
  CHECK(direct == via_loss);
}

TEST_CASE("jitter broadens the pair-delay variance by 2 sigma^2") {
  source::SourceSpec spec;
  spec.pair_rate_per_channel = 1e5;
  spec.duration = 10;
  spec.rng_seed = 7;
  spec.statistics = source::Statistics::poissonian;
  const auto ev = source::generate_pairs(spec);
  const double sigma = 1e-9;
  DetectorSpec d = DetectorSpec::ideal();
  d.jitter_sigma = sigma;
  auto r1 = make_substream(7, {1}), r2 = make_substream(7, {2});
  const auto a = detect(source::arrivals(ev, source::Arm::signal), d, spec.duration, r1, 0);
  const auto b = detect(source::arrivals(ev, source::Arm::idler), d, spec.duration, r2, 1);
  analysis::HistogramOptions o;
  o.range = 400;  // ~32 ns
  const auto h = analysis::cross_histogram(a, b, o);
  const double floor = analysis::far_floor(h, 25e-9);
  double m0 = 0, m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double c = static_cast<double>(h.counts[i]) - floor;
    m0 += c;
    m1 += c * h.tau(i);
    m2 += c * h.tau(i) * h.tau(i);
  }
  const double var = m2 / m0 - (m1 / m0) * (m1 / m0);
  const double gamma = spec.gamma();
  const double expected = 2 / (gamma * gamma) + 2 * sigma * sigma + d.tick * d.tick / 6;
  CHECK(var == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("gate") {
  TimeTagStream tags{0, {quantize(5e-9, 81e-12), quantize(25e-9, 81e-12)}, 81e-12, 1e-6};
  TimeTagStream trig{1, {0}, 81e-12, 1e-6};
  CHECK(gate(tags, trig, 0).tags.empty());
  const auto kept = gate(tags, trig, 20e-9);
  REQUIRE(kept.tags.size() == 1);
  CHECK(kept.tags[0] == tags.tags[0]);

  DetectorSpec ideal = DetectorSpec::ideal();
  auto r1 = make_substream(8, {1}), r2 = make_substream(8, {2});
  const auto uniform = detect(poisson_times(1e6, 1.0, 8), ideal, 1.0, r1, 0);
  const auto triggers = detect(poisson_times(1e3, 1.0, 9), ideal, 1.0, r2, 1);
  const double window = 100e-9;
  const auto g = gate(uniform, triggers, window);
  const double expected = double(uniform.tags.size()) * triggers.rate() * window;
  CHECK(within_3sigma(double(g.tags.size()), expected));
}

TEST_CASE("gated detection keeps only clicks inside a gate") {
  DetectorSpec d = DetectorSpec::ideal();
  d.mode = Mode::gated;
  d.gate_length = 20e-9;
  d.gate_offset = -10e-9;
  const std::vector<double> triggers{1e-3, 2e-3};
  const std::vector<double> x{1e-3 - 11e-9, 1e-3 - 9e-9, 1e-3 + 9e-9, 1.5e-3, 2e-3 + 10e-9, 2e-3 + 9.9e-9};
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  auto rng = make_substream(10, {});
  const auto s = detect_gated(sorted, d, triggers, 1.0, rng);
  CHECK(s.tags.size() == 3);
}

TEST_CASE("spec validation") {
  DetectorSpec d;
  CHECK_NOTHROW(d.validate());
  d.quantum_efficiency = 1.2;
  CHECK_THROWS_AS(d.validate(), std::domain_error);
  d = DetectorSpec{};
  d.tick = 0;
  CHECK_THROWS_AS(d.validate(), std::domain_error);
  d = DetectorSpec{};
  CHECK(intrinsic_dark_rate(d) == doctest::Approx(1.3e3 / (1 - 1.3e3 * 25e-6)));
  CHECK(per_detector_sigma(810e-12) == doctest::Approx(810e-12 / (2.3548 * std::sqrt(2.0))).epsilon(1e-3));
}

}
