#pragma once

// Seed-derived random substreams. A substream is identified by the run seed
// plus a tuple of small integers (purpose, channel, mode, block...), so the
// numbers any piece of work sees do not depend on scheduling.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace qcomb {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(seed, path));
}

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Exp(rate) by inversion.
inline double exponential(Rng& rng, double rate) { return -std::log1p(-uniform01(rng)) / rate; }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Purpose tags for derive_seed paths.
enum class Stream : std::uint64_t {
  source = 1,
  ports = 2,
  loss = 3,
  splitter = 4,
  detector = 5,
  dark = 6,
  jitter = 7,
};

inline std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

}  // namespace qcomb
