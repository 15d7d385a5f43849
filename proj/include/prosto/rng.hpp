#ifndef PROSTO_RNG_HPP
#define PROSTO_RNG_HPP

#include <cstdint>
#include <random>

namespace prosto {

using Rng = std::mt19937_64;

/// Named random substreams. A (seed, substream, index) triple fully
/// determines the generator, so components are reproducible independently.
enum class Substream : std::uint64_t {
  noise_left = 1,
  noise_right = 2,
  transitions = 3,
  labels = 4,
  initial_state = 5,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

inline Rng make_rng(std::uint64_t seed, Substream stream, std::uint64_t index) {
  std::uint64_t h = detail::splitmix64(seed);
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = detail::splitmix64(h ^ index);
  return Rng(h);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace prosto

#endif  // PROSTO_RNG_HPP
