#include "cazp/gef_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cazp/rng.hpp"

namespace cazp {

namespace {
constexpr std::uint64_t kCoeffStream = 0x5EF1E5;  // stream id for zeta draws

// Renormalization threshold for exponent-tracked accumulation. 2^512 leaves
// ample headroom before double overflow at 2^1024.
constexpr double kBig = 0x1.0p512;
constexpr double kBigInv = 0x1.0p-512;

inline void renorm(cplx& acc, long& e2) {
  const double m = std::max(std::abs(acc.real()), std::abs(acc.imag()));
  if (m > kBig) {
    acc *= kBigInv;
    e2 += 512;
  } else if (m < kBigInv && m > 0.0) {
    acc *= kBig;
    e2 -= 512;
  }
}
}  // namespace

CoeffVector sample_coefficients(std::uint64_t seed, int degree) {
  CoeffVector c;
  c.seed = seed;
  c.degree = degree;
  c.coeffs.resize(static_cast<std::size_t>(degree) + 1);
  for (int k = 0; k <= degree; ++k)
    c.coeffs[static_cast<std::size_t>(k)] =
        complex_gaussian(seed, kCoeffStream, static_cast<std::uint64_t>(k));
  return c;
}

int truncation_degree(double radius, double tol) {
  if (radius < 0.0 || !(tol > 0.0) || !(tol < 1.0))
    throw ConfigError("truncation_degree: need radius >= 0 and tol in (0,1)");
  if (radius == 0.0) return 0;

  const double s = radius * radius;
  const double logs = std::log(s);
  const double target = 2.0 * std::log(tol);

  // Terms t_k = s^k/k! in log space. Past k ~ e*s they decay geometrically;
  // cap generously and accumulate the suffix sums backwards.
  const int cap = static_cast<int>(3.0 * s + 60.0 * std::sqrt(s + 1.0) + 80.0);
  std::vector<double> logt(static_cast<std::size_t>(cap) + 1);
  for (int k = 0; k <= cap; ++k)
    logt[static_cast<std::size_t>(k)] = k * logs - std::lgamma(k + 1.0);

  // log of sum_{j>k} t_j, built from the tail inward.
  double log_tail = -std::numeric_limits<double>::infinity();
  int best = cap;
  for (int k = cap; k >= 0; --k) {
    if (log_tail <= target) best = k;
    const double a = std::max(log_tail, logt[static_cast<std::size_t>(k)]);
    log_tail = a + std::log(std::exp(log_tail - a) +
                            std::exp(logt[static_cast<std::size_t>(k)] - a));
  }
  // log_tail now includes all terms k>=0; best is the smallest N whose
  // strict suffix met the target.
  return best;
}

GefSample make_sample(std::uint64_t seed, double reliable_radius, double tol) {
  GefSample s;
  s.reliable_radius = reliable_radius;
  s.truncation_tol = tol;
  s.coeffs = sample_coefficients(seed, truncation_degree(reliable_radius, tol));
  return s;
}

double ScaledCplx::log_abs() const {
  if (is_zero()) return -std::numeric_limits<double>::infinity();
  return std::log(std::abs(mant)) + static_cast<double>(exp2) * M_LN2;
}

cplx ScaledCplx::unscaled() const {
  return mant * std::exp2(static_cast<double>(exp2));
}

cplx evaluate_psi(const CoeffVector& c, cplx z) {
  cplx b{0.0, 0.0};
  for (int k = c.degree; k >= 0; --k)
    b = c.coeffs[static_cast<std::size_t>(k)] + b * z / std::sqrt(k + 1.0);
  return b;
}

cplx evaluate_psi_prime(const CoeffVector& c, cplx z) {
  // Differentiated series has coefficients zeta_{k+1} sqrt(k+1) over the
  // same sqrt(k!) basis; reuse the backward recurrence.
  cplx b{0.0, 0.0};
  for (int k = c.degree - 1; k >= 0; --k) {
    const cplx ck = c.coeffs[static_cast<std::size_t>(k) + 1] * std::sqrt(k + 1.0);
    b = ck + b * z / std::sqrt(k + 1.0);
  }
  return b;
}

void evaluate_scaled(const CoeffVector& c, cplx z, ScaledCplx& psi,
                     ScaledCplx& psi_prime, int max_degree) {
  // Both recurrences share the factor z/sqrt(k+1); run them in one sweep with
  // a common power-of-two exponent and renormalize together.
  const int top = (max_degree >= 0) ? std::min(max_degree, c.degree) : c.degree;
  cplx b{0.0, 0.0};   // psi accumulator
  cplx d{0.0, 0.0};   // psi' accumulator
  long e2 = 0;
  for (int k = top; k >= 0; --k) {
    const double inv = 1.0 / std::sqrt(k + 1.0);
    const cplx zk = z * inv;
    // Coefficients enter at exponent 0; fold the running scale back in.
    const double unscale = std::exp2(static_cast<double>(-e2));
    if (k < top) {
      d = c.coeffs[static_cast<std::size_t>(k) + 1] * std::sqrt(k + 1.0) * unscale + d * zk;
    }
    b = c.coeffs[static_cast<std::size_t>(k)] * unscale + b * zk;
    const double m = std::max({std::abs(b.real()), std::abs(b.imag()),
                               std::abs(d.real()), std::abs(d.imag())});
    if (m > kBig) {
      b *= kBigInv;
      d *= kBigInv;
      e2 += 512;
    }
  }
  psi = {b, e2};
  psi_prime = {d, e2};
  renorm(psi.mant, psi.exp2);
  renorm(psi_prime.mant, psi_prime.exp2);
}

double evaluate_potential(const CoeffVector& c, cplx z) {
  ScaledCplx p, dp;
  evaluate_scaled(c, z, p, dp);
  if (p.is_zero()) return -std::numeric_limits<double>::infinity();
  return 0.5 * p.log_abs() - 0.25 * std::norm(z);
}

double log_weighted_modulus(const CoeffVector& c, cplx z) {
  ScaledCplx p, dp;
  evaluate_scaled(c, z, p, dp);
  return p.log_abs() - 0.5 * std::norm(z);
}

cplx gradient_potential(const CoeffVector& c, cplx z) {
  ScaledCplx p, dp;
  evaluate_scaled(c, z, p, dp);
  const double logw = p.log_abs() - 0.5 * std::norm(z);
  if (logw < std::log(1e-290))
    throw NearZeroError("gradient_potential: point is on a zero");
  // Shared exponent cancels in the ratio.
  const cplx ratio = (dp.mant / p.mant) *
                     std::exp2(static_cast<double>(dp.exp2 - p.exp2));
  return 0.5 * std::conj(ratio) - 0.5 * z;
}

}  // namespace cazp
