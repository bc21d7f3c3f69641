#pragma once
// Tail statistics: fitting exp(-rate * lambda^2) survival laws, exponential
// moments with stability diagnostics, and the envelope-tail transfer
// experiment (exponential moments of a field eta transfer to a Gaussian tail
// for the Lip(1) envelope built on it).

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cazp/potential_field.hpp"

namespace cazp {

struct TailReport {
  std::vector<double> lambda;    // ascending threshold grid
  std::vector<double> survival;  // empirical Pr{X > lambda}, non-increasing
  double rate = 0.0;             // fitted survival ~ prefactor exp(-rate lambda^2)
  double prefactor = 0.0;
  double rate_lo = 0.0;  // bootstrap percentile CI for rate
  double rate_hi = 0.0;
  double quality = 0.0;  // weighted R^2 of log survival against lambda^2
  int n_samples = 0;
};

// Weighted least squares of log survival against lambda^2 on an adaptive
// grid from the sample median up to the 20-exceedance threshold; weights are
// exceedance counts (the bound is a tail statement, so the sub-median bulk
// is excluded). Needs >= 1000 nonnegative samples; throws Error on
// degenerate input (all samples equal, or no resolvable tail).
TailReport fit_gaussian_tail(const std::vector<double>& samples);

struct MomentReport {
  double mean = 0.0;  // sample mean of exp(eps x^2)
  double ci_lo = 0.0;  // bootstrap percentile CI
  double ci_hi = 0.0;
  bool unstable = false;  // top 1% of samples carry > 50% of the mean
  int n = 0;
};

// E exp(eps X^2) estimated by the sample mean. The instability flag (not an
// error) fires when the estimate is dominated by the largest percentile,
// i.e. eps is too large for the sample size.
MomentReport exp_moment(const std::vector<double>& samples, double eps);

struct EnvelopeTailReport {
  double const_c = 0.0;
  int trials = 0;
  TailReport tail;  // of the envelope value at the origin
  bool pass = false;  // quality >= 0.9 and rate > 0
};

// Builds the Lip(1) envelope R on each sampled field and collects R(0)
// across trials: a verified exponential moment for the field must transfer
// to a Gaussian tail for R. eta_field(t) returns trial t's nonnegative
// field on a grid containing the origin.
EnvelopeTailReport envelope_tail_check(
    const std::function<GridField(int)>& eta_field, double const_c, int trials);

// One row per grid point of each named fit.
// Header: statistic,lambda,survival,fit_rate,fit_prefactor,fit_r2
void write_tails_csv(
    const std::vector<std::pair<std::string, TailReport>>& reports,
    const std::string& path);

}  // namespace cazp
