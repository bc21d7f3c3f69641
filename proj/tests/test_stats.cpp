#include "doctest.h"

#include <cmath>
#include <vector>

#include "cazp/common.hpp"
#include "cazp/gef_core.hpp"
#include "cazp/potential_field.hpp"
#include "cazp/rng.hpp"
#include "cazp/stats.hpp"

using namespace cazp;

namespace {

std::vector<double> gaussian_moduli(std::uint64_t seed, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] =
        std::abs(complex_gaussian(seed, 0, static_cast<std::uint64_t>(i)));
  return v;
}

// Smoothed |phi| field of a fresh sample on a +-2 grid; the convolution
// erodes the unit kernel radius, leaving +-1 around the origin.
GridField abs_phi_field(int trial) {
  GefSample s = make_sample(substream(1601, static_cast<std::uint64_t>(trial)), 4.0);
  GridField g = potential_grid(s, cplx{0.0, 0.0}, 2.0, 0.2);
  return convolve(absolute_patched(g).field, make_kernel(0.2, 1.0));
}

}  // namespace

TEST_CASE("complex gaussian modulus recovers the unit tail rate") {
  std::vector<double> v = gaussian_moduli(7, 100000);
  TailReport rep = fit_gaussian_tail(v);
  CHECK(rep.n_samples == 100000);
  CHECK(std::abs(rep.rate - 1.0) <= 0.05);
  CHECK(rep.prefactor == doctest::Approx(1.0).epsilon(0.15));
  CHECK(rep.quality >= 0.99);
  CHECK(rep.rate_lo <= rep.rate);
  CHECK(rep.rate <= rep.rate_hi);
  CHECK(rep.rate_lo <= 1.0);
  CHECK(1.0 <= rep.rate_hi);
  REQUIRE(rep.lambda.size() == rep.survival.size());
  for (std::size_t i = 1; i < rep.lambda.size(); ++i) {
    CHECK(rep.lambda[i] > rep.lambda[i - 1]);
    CHECK(rep.survival[i] <= rep.survival[i - 1]);
  }
  CHECK(rep.survival.front() <= 0.5 + 1e-9);

  TailReport rep2 = fit_gaussian_tail(v);
  CHECK(rep2.rate == rep.rate);
  CHECK(rep2.rate_lo == rep.rate_lo);
}

TEST_CASE("degenerate and invalid inputs are rejected") {
  std::vector<double> zeros(2000, 0.0);
  CHECK_THROWS_AS(fit_gaussian_tail(zeros), Error);
  std::vector<double> fives(2000, 5.0);
  CHECK_THROWS_AS(fit_gaussian_tail(fives), Error);
  std::vector<double> few(500, 1.0);
  CHECK_THROWS_AS(fit_gaussian_tail(few), ConfigError);
  std::vector<double> neg = gaussian_moduli(8, 2000);
  neg[17] = -1.0;
  CHECK_THROWS_AS(fit_gaussian_tail(neg), ConfigError);
  neg[17] = std::nan("");
  CHECK_THROWS_AS(fit_gaussian_tail(neg), ConfigError);

  CHECK_THROWS_AS(exp_moment({1.0, 2.0}, 0.0), ConfigError);
  CHECK_THROWS_AS(exp_moment({}, 0.5), ConfigError);
}

TEST_CASE("heavy tails are flagged by low fit quality") {
  std::vector<double> v(20000);
  for (std::size_t i = 0; i < v.size(); ++i) {
    double u = uniform01(11, 0, i);
    v[i] = std::tan(0.5 * M_PI * u);  // half-Cauchy
  }
  TailReport rep = fit_gaussian_tail(v);
  CHECK(rep.quality < 0.9);
}

TEST_CASE("exponential moment matches the analytic value and flags divergence") {
  std::vector<double> none(10, 0.0);
  MomentReport unit = exp_moment(none, 0.7);
  CHECK(unit.mean == 1.0);
  CHECK(unit.ci_lo == 1.0);
  CHECK(unit.ci_hi == 1.0);
  CHECK(!unit.unstable);

  // E exp(|w|^2 / 2) = 2 for a standard complex gaussian.
  std::vector<double> v = gaussian_moduli(9, 100000);
  MomentReport m = exp_moment(v, 0.5);
  CHECK(std::abs(m.mean - 2.0) <= 0.05);
  CHECK(m.ci_lo < m.mean);
  CHECK(m.mean < m.ci_hi);
  CHECK(!m.unstable);

  // At eps = 1 the moment diverges: exp(|w|^2) is Pareto with unit index,
  // whose expected top-1% share is 1 - ln(100)/ln(n), above 1/2 from n ~ 1e4.
  std::vector<double> w = gaussian_moduli(10, 100000);
  MomentReport bad = exp_moment(w, 1.0);
  CHECK(bad.unstable);
}

TEST_CASE("envelope tail check transfers the field moment") {
  EnvelopeTailReport rep = envelope_tail_check(abs_phi_field, 16.0, 1500);
  CHECK(rep.pass);
  CHECK(rep.tail.rate > 0.0);
  CHECK(rep.tail.quality >= 0.9);
  CHECK(rep.trials == 1500);
  // Envelope floor: every collected value is at least sqrt(const_c).
  CHECK(rep.tail.lambda.front() >= 4.0);

  CHECK_THROWS_AS(envelope_tail_check(abs_phi_field, 16.0, 500), ConfigError);

  // Constant field: the envelope is exactly sqrt(const_c) everywhere and the
  // tail fit must refuse the degenerate sample.
  auto flat = [](int) {
    GridField g = make_grid(cplx{0.0, 0.0}, 1.0, 0.25);
    return g;  // values default to 0
  };
  CHECK(compute_R(flat(0), 16.0).value_at(cplx{0.0, 0.0}) == 4.0);
  CHECK_THROWS_AS(envelope_tail_check(flat, 16.0, 1000), Error);
}

TEST_CASE("envelope rate decreases as the floor grows") {
  EnvelopeTailReport r9 = envelope_tail_check(abs_phi_field, 9.0, 2500);
  EnvelopeTailReport r16 = envelope_tail_check(abs_phi_field, 16.0, 2500);
  EnvelopeTailReport r25 = envelope_tail_check(abs_phi_field, 25.0, 2500);
  CHECK(r9.pass);
  CHECK(r16.pass);
  CHECK(r25.pass);
  CHECK(r9.tail.rate > r16.tail.rate);
  CHECK(r16.tail.rate > r25.tail.rate);
  // Direction must hold with non-overlapping bootstrap intervals.
  CHECK(r9.tail.rate_lo > r16.tail.rate_hi);
  CHECK(r16.tail.rate_lo > r25.tail.rate_hi);
}
