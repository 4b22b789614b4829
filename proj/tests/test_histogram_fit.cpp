#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oracles/oracles.hpp"
#include "qcomb/detector_chain.hpp"
#include "qcomb/g2_fit.hpp"
#include "qcomb/histogram.hpp"
#include "qcomb/rng.hpp"

using namespace qcomb;
using namespace qcomb::analysis;
using detector::TimeTagStream;

namespace {

TimeTagStream poisson_stream(double rate, double duration, std::uint64_t seed, int channel) {
  auto rng = make_substream(seed, {7});
  TimeTagStream s{channel, {}, 81e-12, duration};
  for (double t = exponential(rng, rate); t < duration; t += exponential(rng, rate)) {
    const Ticks k = detector::quantize(t, s.tick);
    if (s.tags.empty() || k > s.tags.back()) s.tags.push_back(k);
  }
  return s;
}

// Noise-free histogram: floor plus n_pairs times the exact tick-difference law.
CoincidenceHistogram synthetic(double gamma, double s, double floor, double n_pairs, Ticks range) {
  CoincidenceHistogram h;
  h.bin_width = 1;
  h.half_bins = range;
  h.tick = 81e-12;
  h.duration = 1;
  for (Ticks d = -range; d <= range; ++d)
    h.counts.push_back(static_cast<std::uint64_t>(
        std::llround(floor + n_pairs * oracle::tick_difference_pmf(d, gamma, s, h.tick))));
  return h;
}

}  // namespace

TEST_SUITE("histogram_fit") {

TEST_CASE("hand-worked histogram") {
  TimeTagStream a{0, {10, 20}, 81e-12, 1};
  TimeTagStream b{1, {12, 19, 30}, 81e-12, 1};
  const auto h = cross_histogram(a, b, {3, 15, false});
  REQUIRE(h.half_bins == 5);
  REQUIRE(h.size() == 11);
  // Differences 2, 9, -8, -1, 10 land in bins k = 1, 3, -3, 0, 3.
  std::vector<std::uint64_t> expected(11, 0);
  expected[5 + 1] = 1;
  expected[5 + 3] = 2;
  expected[5 - 3] = 1;
  expected[5 + 0] = 1;
  CHECK(h.counts == expected);
  CHECK(h.tau(5) == 0.0);
  CHECK(h.tau(6) == doctest::Approx(3 * 81e-12));
}

TEST_CASE("argument errors") {
  TimeTagStream a{0, {1}, 81e-12, 1}, b{1, {2}, 81e-12, 1}, c{2, {3}, 50e-12, 1};
  CHECK_THROWS_AS(cross_histogram(a, b, {2, 10, false}), std::invalid_argument);
  CHECK_THROWS_AS(cross_histogram(a, c, {1, 10, false}), std::invalid_argument);
  CHECK_THROWS_AS(cross_histogram(a, b, {1, -1, false}), std::invalid_argument);
}

TEST_CASE("swapping start and stop mirrors the histogram") {
  const auto a = poisson_stream(2e5, 0.5, 1, 0), b = poisson_stream(3e5, 0.5, 2, 1);
  for (Ticks bin : {1, 3, 25}) {
    const HistogramOptions o{bin, 600, false};
    const auto ab = cross_histogram(a, b, o), ba = cross_histogram(b, a, o);
    REQUIRE(ab.size() == ba.size());
    bool mirrored = true;
    for (std::size_t i = 0; i < ab.size(); ++i) mirrored &= ab.counts[i] == ba.counts[ab.size() - 1 - i];
    CHECK(mirrored);
    CHECK(cross_histogram_serial(a, b, o) == ab);
  }
}

TEST_CASE("independent streams give a flat floor") {
  const double r1 = 2e5, r2 = 3e5, T = 2.0;
  const auto a = poisson_stream(r1, T, 3, 0), b = poisson_stream(r2, T, 4, 1);
  const Ticks bin = 13;
  const auto h = cross_histogram(a, b, {bin, 13 * 100, false});
  const double expected = a.rate() * b.rate() * T * bin * 81e-12;
  CHECK(expected == doctest::Approx(r1 * r2 * T * bin * 81e-12).epsilon(0.01));
  CHECK(far_floor(h, 0) == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("same-stream histogram skips the zero-delay self pair") {
  const auto a = poisson_stream(1e5, 0.2, 5, 0);
  const auto h = cross_histogram(a, a, {1, 50, true});
  CHECK(h.counts[50] == 0);
}

TEST_CASE("kernel and widths") {
  const double gamma = 2 * oracle::kPi * 110e6;
  for (double tau : {0.0, 1e-9, -3e-9, 10e-9}) CHECK(peak_kernel(tau, gamma, 0) == std::exp(-gamma * std::abs(tau)));
  CHECK(peak_fwhm(gamma, 0) == doctest::Approx(oracle::kFwhm_110MHz).epsilon(1e-3));
  for (double s : {50e-12, 243e-12 * std::sqrt(2.0), 1e-9})
    CHECK(peak_fwhm(gamma, s) == doctest::Approx(oracle::convolved_fwhm(gamma, s)).epsilon(2e-3));
  // The convolution keeps the area 2 / gamma.
  for (double s : {0.0, 343e-12, 2e-9}) {
    double area = 0;
    const double h = 5e-12;
    for (double t = -60e-9; t <= 60e-9; t += h) area += peak_kernel(t, gamma, s) * h;
    CHECK(area == doctest::Approx(2 / gamma).epsilon(1e-3));
  }
  CHECK(peak_kernel(0, gamma, 1e-9) < 1.0);
  CHECK(erfcx(24.999) == doctest::Approx(erfcx(25.001)).epsilon(1e-4));
}

TEST_CASE("fit recovers the linewidth from an exact histogram") {
  const double nu = 110e6, gamma = 2 * oracle::kPi * nu;
  SUBCASE("no jitter") {
    const auto h = synthetic(gamma, 0, 500, 1e8, 1300);
    const auto f = fit_g2(h, 0);
    REQUIRE(f.ok);
    CHECK(f.delta_nu_corr == doctest::Approx(nu).epsilon(0.01));
    CHECK(f.fwhm == doctest::Approx(oracle::kFwhm_110MHz).epsilon(0.02));
  }
  SUBCASE("jittered") {
    const double sigma = 243e-12;
    const auto h = synthetic(gamma, std::sqrt(2.0) * sigma, 500, 1e8, 1300);
    const auto f = fit_g2(h, sigma);
    REQUIRE(f.ok);
    CHECK(f.delta_nu_corr == doctest::Approx(nu).epsilon(0.01));
    CHECK(f.delta_nu_fit < f.delta_nu_corr);
    CHECK(std::abs(f.tau0) < 81e-12);
  }
  SUBCASE("shifted peak") {
    CoincidenceHistogram h = synthetic(gamma, 0, 200, 1e7, 1300);
    std::rotate(h.counts.rbegin(), h.counts.rbegin() + 30, h.counts.rend());
    const auto f = fit_g2(h, 0);
    REQUIRE(f.ok);
    CHECK(f.tau0 == doctest::Approx(30 * 81e-12).epsilon(0.02));
    CHECK(f.delta_nu_corr == doctest::Approx(nu).epsilon(0.01));
  }
}

TEST_CASE("flat histogram reports no peak") {
  const auto a = poisson_stream(2e5, 1.0, 6, 0), b = poisson_stream(2e5, 1.0, 7, 1);
  const auto h = cross_histogram(a, b, {1, 1300, false});
  const auto f = fit_g2(h, 0);
  CHECK_FALSE(f.ok);
  CHECK(f.diagnostics.find("no significant peak") != std::string::npos);

  CoincidenceHistogram empty;
  empty.half_bins = 100;
  empty.counts.assign(201, 0);
  const auto e = fit_g2(empty, 0);
  CHECK_FALSE(e.ok);
  CHECK(e.diagnostics == "empty histogram");
}

}
