#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tpa {

using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Hashes a seed together with any number of stream coordinates.
/// The result depends only on the arguments, so stream j can be rebuilt
/// without touching streams < j.
template <typename... Ids>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Ids... ids) noexcept {
  std::uint64_t h = detail::splitmix64(seed);
  ((h = detail::splitmix64(h ^ detail::splitmix64(static_cast<std::uint64_t>(ids) + 0x632be59bd9b4e019ULL))), ...);
  return h;
}

/// Well-known phase identifiers used when deriving streams.
namespace phase {
inline constexpr std::uint64_t runs = 0;
inline constexpr std::uint64_t ras_phase1 = 1;
inline constexpr std::uint64_t ras_phase2 = 2;
inline constexpr std::uint64_t center = 3;
inline constexpr std::uint64_t accept_reject = 4;
inline constexpr std::uint64_t diagnostics = 5;
}  // namespace phase

/// A family of independent generator streams addressed by (seed, phase, index).
struct Streams {
  std::uint64_t seed = 0;
  std::uint64_t phase = phase::runs;

  [[nodiscard]] Rng make(std::uint64_t index) const { return Rng{derive_seed(seed, phase, index)}; }
  [[nodiscard]] Streams with_phase(std::uint64_t p) const { return {seed, p}; }
  // Independent sub-experiment, e.g. repetition r of a coverage study.
  [[nodiscard]] Streams child(std::uint64_t id) const { return {derive_seed(seed, 0xc41dULL, id), phase}; }
};

/// Uniform draw from the open interval (0, 1): midpoints of a 2^-52 grid,
/// so both ends stay exactly representable and never round to 0 or 1.
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 12) + 0.5) * 0x1.0p-52;
}

inline double uniform_open(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform_open01(rng); }

inline double standard_exponential(Rng& rng) { return -std::log(uniform_open01(rng)); }

inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>{0, n - 1}(rng);
}

}  // namespace tpa
