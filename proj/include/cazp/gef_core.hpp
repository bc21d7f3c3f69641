#pragma once
// Random entire function psi(z) = sum_k zeta_k z^k / sqrt(k!) with i.i.d.
// standard complex Gaussian coefficients, truncated at a degree chosen so the
// RMS truncation error on the working disk is below tolerance. Provides psi,
// psi', the normalized log-modulus potential, and its gradient.

#include <complex>
#include <cstdint>
#include <vector>

#include "cazp/common.hpp"

namespace cazp {

using cplx = std::complex<double>;

struct CoeffVector {
  std::uint64_t seed = 0;
  int degree = 0;                // highest retained power
  std::vector<cplx> coeffs;     // zeta_0 .. zeta_degree
};

struct GefSample {
  CoeffVector coeffs;
  double reliable_radius = 0.0;  // evaluations trusted only for |z| <= this
  double truncation_tol = 1e-12;
};

// Deterministic in (seed, degree); growing the degree with the same seed
// keeps the existing prefix bitwise identical.
CoeffVector sample_coefficients(std::uint64_t seed, int degree);

// Smallest N with sum_{k>N} radius^{2k}/k! <= tol^2. Tail summed in log
// space, so no overflow for any radius representable in double.
int truncation_degree(double radius, double tol);

// Sample whose degree covers the requested disk at the given tolerance.
GefSample make_sample(std::uint64_t seed, double reliable_radius,
                      double tol = 1e-12);

// Value carried as mantissa * 2^exp2 so log-modulus and ratios stay exact
// far beyond double range (the series grows like exp(|z|^2/2)).
struct ScaledCplx {
  cplx mant{0.0, 0.0};
  long exp2 = 0;

  bool is_zero() const { return mant == cplx{0.0, 0.0}; }
  double log_abs() const;       // -inf when zero
  cplx unscaled() const;        // may overflow to inf for large exp2
};

// psi(z) by the backward recurrence b_k = zeta_k + b_{k+1} * z / sqrt(k+1),
// which keeps every intermediate within a factor ~exp(|z|^2/2) of the value.
cplx evaluate_psi(const CoeffVector& c, cplx z);

// psi'(z) via the term-differentiated series (coefficients zeta_{k+1}*sqrt(k+1)).
cplx evaluate_psi_prime(const CoeffVector& c, cplx z);

// Exponent-tracked psi and psi'; valid at any |z|. With max_degree >= 0 only
// the coefficient prefix up to max_degree enters (callers may cap the degree
// per evaluation radius; the discarded tail is below the sample tolerance).
void evaluate_scaled(const CoeffVector& c, cplx z, ScaledCplx& psi,
                     ScaledCplx& psi_prime, int max_degree = -1);

// phi(z) = (1/2) log|psi(z)| - |z|^2/4. Returns -infinity when psi(z) = 0.
double evaluate_potential(const CoeffVector& c, cplx z);

// grad phi as a complex number (d/dx, d/dy) = conj(psi'/psi)/2 - z/2.
// Throws NearZeroError when |psi(z)| e^{-|z|^2/2} < 1e-290 (the point has
// effectively reached a zero and the ratio psi'/psi is meaningless).
cplx gradient_potential(const CoeffVector& c, cplx z);

// log(|psi(z)| e^{-|z|^2/2}); the weighted modulus is the stationary
// quantity (its square is Exp(1)-distributed at every z).
double log_weighted_modulus(const CoeffVector& c, cplx z);

}  // namespace cazp
