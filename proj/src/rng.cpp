#include "cazp/rng.hpp"

#include <cmath>

namespace cazp {

std::complex<double> complex_gaussian(std::uint64_t seed, std::uint64_t stream,
                                      std::uint64_t index) {
  const double u1 = uniform01_pos(seed, stream, index, 0);
  const double u2 = uniform01(seed, stream, index, 1);
  const double r = std::sqrt(-std::log(u1));
  const double th = 2.0 * M_PI * u2;
  return {r * std::cos(th), r * std::sin(th)};
}

double normal01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const double u1 = uniform01_pos(seed, stream, index, 2);
  const double u2 = uniform01(seed, stream, index, 3);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int poisson_count(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                  double mean) {
  const double u = uniform01(seed, stream, index, 4);
  // Walk the CDF with the log-space pmf recurrence log p_k = log p_{k-1} + log(mean/k).
  double logp = -mean;  // log pmf at k=0
  double cdf = std::exp(logp);
  int k = 0;
  const int cap = static_cast<int>(mean + 12.0 * std::sqrt(mean + 1.0) + 50.0);
  while (u > cdf && k < cap) {
    ++k;
    logp += std::log(mean / k);
    cdf += std::exp(logp);
  }
  return k;
}

}  // namespace cazp
