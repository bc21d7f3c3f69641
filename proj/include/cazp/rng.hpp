#pragma once
// Counter-based deterministic random streams. Every draw is a pure function
// of (seed, stream, index), so trials can be generated in any order and from
// any worker without shared state, and results are reproducible across
// platforms (no std::*_distribution involved).

#include <complex>
#include <cstdint>

namespace cazp {

namespace detail {
// SplitMix64 finalizer. Full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}
}  // namespace detail

// 64 hash bits for lane `salt` of draw `index` in stream `stream`.
inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t index, std::uint64_t salt = 0) {
  std::uint64_t x = detail::mix64(seed);
  x = detail::mix64(x ^ (stream * 0xD1B54A32D192ED03ull));
  x = detail::mix64(x ^ (index * 0x8CB92BA72F3D8DD7ull) ^ salt);
  return x;
}

// Derives a child stream id; used to split one logical experiment into
// independent substreams (per trial, per model, per use site).
inline std::uint64_t substream(std::uint64_t stream, std::uint64_t child) {
  return detail::mix64(stream ^ (child * 0xA0761D6478BD642Full) ^ 0x1D8E4E27C47D124Full);
}

// Uniform on [0,1), 53-bit mantissa.
inline double uniform01(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t index, std::uint64_t salt = 0) {
  return static_cast<double>(counter_bits(seed, stream, index, salt) >> 11) * 0x1.0p-53;
}

// Uniform on (0,1]; safe as a log argument.
inline double uniform01_pos(std::uint64_t seed, std::uint64_t stream,
                            std::uint64_t index, std::uint64_t salt = 0) {
  return (static_cast<double>(counter_bits(seed, stream, index, salt) >> 11) + 1.0) * 0x1.0p-53;
}

// Standard complex Gaussian: density pi^-1 exp(-|w|^2), so E|w|^2 = 1 and
// Re, Im are independent N(0, 1/2). Sampled in polar form: |w|^2 ~ Exp(1),
// arg uniform. Two hash lanes per index.
std::complex<double> complex_gaussian(std::uint64_t seed, std::uint64_t stream,
                                      std::uint64_t index);

// Real standard normal N(0,1); one hash lane pair per index.
double normal01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

// Poisson count by inversion of the CDF from a single uniform. Exact and
// deterministic; O(mean) time, intended for mean up to ~10^4.
int poisson_count(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                  double mean);

}  // namespace cazp
