#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "oracles/oracles.hpp"
#include "qcomb/ring_model.hpp"

using namespace qcomb::ring;

TEST_SUITE("ring_model") {

TEST_CASE("linewidth from Q") {
  CHECK(linewidth_from_q(1556.15e-9, 1.375e6) == doctest::Approx(oracle::kLinewidth_1556nm_Q1375e6).epsilon(0.5e6 / 140.1e6));
  CHECK(linewidth_from_q(1550.00e-9, 1.0e6) == doctest::Approx(oracle::kLinewidth_1550nm_Q1e6).epsilon(1e-5));
  const double a = linewidth_from_q(1556.15e-9, 1e6), b = linewidth_from_q(1556.15e-9, 2e6);
  CHECK(b == a / 2);
  CHECK_THROWS_AS(linewidth_from_q(0, 1e6), std::domain_error);
  CHECK_THROWS_AS(linewidth_from_q(1550e-9, -1), std::domain_error);
}

TEST_CASE("coherence time") {
  CHECK(coherence_time(110e6) == doctest::Approx(oracle::kCoherence_110MHz).epsilon(0.005));
  CHECK(coherence_time(1.0 / oracle::kPi) == doctest::Approx(1.0));
  CHECK(coherence_time(140e6) == doctest::Approx(oracle::kCoherence_140MHz).epsilon(5e-4));
  CHECK(coherence_time(linewidth_from_q(1556.15e-9, 1.375e6)) == doctest::Approx(oracle::kCoherence_140MHz).epsilon(0.01));
  CHECK_THROWS_AS(coherence_time(0), std::domain_error);
}

TEST_CASE("channel grid reproduces the device's DWDM table") {
  const auto grid = build_channel_grid(ItuChannel{26}, 200e9, 5);
  REQUIRE(grid.pairs.size() == 5);
  CHECK(frequency_to_wavelength(grid.pump_frequency) * 1e9 == doctest::Approx(1556.15).epsilon(0.01 / 1556.15));
  for (const auto& row : oracle::kChannelTable) {
    if (row.itu == 26) continue;
    bool found = false;
    for (const auto& p : grid.pairs) {
      if (p.signal.index == row.itu) {
        CHECK(std::abs(p.signal_wavelength * 1e9 - row.wavelength_nm) < 0.01);
        found = true;
      }
      if (p.idler.index == row.itu) {
        CHECK(std::abs(p.idler_wavelength * 1e9 - row.wavelength_nm) < 0.01);
        found = true;
      }
    }
    CHECK_MESSAGE(found, row.label);
  }
  CHECK(grid.pairs[4].signal.label() == "H36");
  CHECK(grid.pairs[4].idler.label() == "H16");
}

TEST_CASE("grid symmetry and ordering") {
  const auto grid = build_channel_grid(ItuChannel{26}, 200e9, 5);
  for (const auto& p : grid.pairs)
    CHECK(std::abs(p.signal_frequency + p.idler_frequency - 2 * grid.pump_frequency) < 1e-6 * grid.pump_frequency);
  // Wavelength grows as the ITU index falls.
  for (std::size_t k = 1; k < grid.pairs.size(); ++k) {
    CHECK(grid.pairs[k].signal_wavelength < grid.pairs[k - 1].signal_wavelength);
    CHECK(grid.pairs[k].idler_wavelength > grid.pairs[k - 1].idler_wavelength);
  }
  CHECK(build_channel_grid(ItuChannel{26}, 200e9, 0).pairs.empty());
  CHECK_THROWS(build_channel_grid(ItuChannel{26}, 200e9, -1));
  CHECK(ItuChannel::nearest(ItuChannel{36}.frequency() + 10e9).index == 36);
}

TEST_CASE("thermal shift") {
  CHECK(thermal_shift(1, -2e9) == doctest::Approx(-2e9));
  CHECK(thermal_shift(0, 123.0) == 0.0);
  CHECK(thermal_shift(5, -2e9) == doctest::Approx(-10e9));
}

TEST_CASE("relative pair rate") {
  CHECK(relative_pair_rate(1) == 1.0);
  CHECK(relative_pair_rate(2) == doctest::Approx(64));
  CHECK(relative_pair_rate(17.9) == doctest::Approx(oracle::kEnhancement_17_9_pow6).epsilon(0.005));
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(0.1, 10);
  for (int i = 0; i < 100; ++i) {
    const double a = u(eng), b = u(eng);
    CHECK(relative_pair_rate(a * b) == doctest::Approx(relative_pair_rate(a) * relative_pair_rate(b)).epsilon(1e-12));
    CHECK((relative_pair_rate(std::max(a, b)) >= relative_pair_rate(std::min(a, b))));
  }
}

TEST_CASE("FSR from geometry") {
  CHECK(fsr_from_geometry(135e-6, 1.768) == doctest::Approx(200e9).epsilon(0.005));
  CHECK(fsr_from_geometry(270e-6, 1.768) == doctest::Approx(fsr_from_geometry(135e-6, 1.768) / 2));
}

TEST_CASE("RingSpec validation") {
  RingSpec r;
  CHECK_NOTHROW(r.validate());
  r.linewidth = 150e6;
  CHECK_THROWS_AS(r.validate(), std::domain_error);
  r = RingSpec{};
  r.radius = 150e-6;
  CHECK_THROWS_AS(r.validate(), std::domain_error);
  r = RingSpec{};
  r.thermal_coeff = 3e9;
  CHECK_NOTHROW(r.validate());
  r.q_factor = 0;
  CHECK_THROWS_AS(r.validate(), std::domain_error);
}

}
