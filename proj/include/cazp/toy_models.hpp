#pragma once
// Three comparison point processes and the scaled linear statistic
// Z_{L,h} = sum over points of h(z / sqrt L). Variance of Z grows like L for
// the thinned lattice, stays flat for the Gaussian-displaced lattice, and
// decays like 1/L for the zero process; variance_scaling measures the
// log-log slope across a geometric ladder of L.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cazp/gef_core.hpp"
#include "cazp/whitney.hpp"

namespace cazp {

enum class ToyModel { GEF, S1_BERNOULLI, S2_GAUSSIAN_LATTICE };

const char* model_name(ToyModel m);

// Radial C^2 test function with compact support and cached quadrature
// integrals: integral of h, of h^2, of |grad h|^2, and of (lap h)^2.
struct TestFunction {
  std::string name;
  double support_radius = 1.0;
  std::function<double(double)> radial;     // h at radius r
  std::function<double(double)> radial_d1;  // dh/dr
  std::function<double(double)> radial_d2;  // d2h/dr2
  double integral = 0.0;
  double norm_h2 = 0.0;
  double norm_grad2 = 0.0;
  double norm_lap2 = 0.0;

  double value(cplx z) const {
    double r = std::abs(z);
    return r < support_radius ? radial(r) : 0.0;
  }
};

// Midpoint quadrature of the four cached integrals at the given radial step.
void recompute_norms(TestFunction& f, double step);

// h(r) = (1 - r^2)^3 on r < 1. Analytic integrals: pi/4, pi/7, 6 pi/5,
// 96 pi/5 (in the cached order); the quadrature cache must land on them.
TestFunction bump_function(double quad_step = 1e-4);

// h(r) = exp(-2 r^2) (1 - r^2)^3 on r < 1: a second smoother profile to
// check that slope estimates do not depend on the bump's constants.
TestFunction gaussian_bump_function(double quad_step = 1e-4);

// h_s(r) = h(r / s): support and integrals rescale, norms recomputed. The
// gradient norm is scale-free in the plane while the Laplacian norm shrinks
// by s^-2, so wider supports reach the flat displaced-lattice variance law
// at smaller L.
TestFunction scaled_support(const TestFunction& f, double s,
                            double quad_step = 1e-4);

struct PointProcessSample {
  ToyModel model = ToyModel::S1_BERNOULLI;
  std::vector<cplx> points;  // all inside window
  Rect window{0.0, 0.0, 0.0, 0.0};
  std::uint64_t seed = 0;
  // Radius of the disk around the window center inside which the sample is a
  // complete realization of the process; the zero process only covers the
  // inscribed disk of the window.
  double covered_radius = 0.0;
};

// Deterministic in (model, seed). Unit-mean-per-pi intensity for all three:
// the thinned lattice has spacing sqrt(pi/2) and keeps each site with
// probability 1 - deletion_prob (per-site coin independent of the window);
// the displaced lattice has spacing sqrt(pi) and adds eta_scale times a
// standard complex Gaussian per site, enumerating sites 6 units beyond the
// window so displaced entrants are not missed; the zero process delegates to
// the zero finder on the inscribed disk (window must be centered at the
// origin). deletion_prob and eta_scale are test hooks; defaults are the
// models themselves.
PointProcessSample sample_process(ToyModel model, const Rect& window,
                                  std::uint64_t seed, double deletion_prob = 0.5,
                                  double eta_scale = 1.0);

// Z_{L,h} = sum h(z / sqrt L). Throws ConfigError when the scaled support
// disk is not covered by the sample.
double linear_statistic(const PointProcessSample& s, const TestFunction& h,
                        double L);

struct VarianceRow {
  ToyModel model = ToyModel::S1_BERNOULLI;
  double L = 0.0;
  int trials = 0;
  double mean_z = 0.0;
  double var_z = 0.0;
  double ci_lo = 0.0;  // bootstrap percentile CI for var_z
  double ci_hi = 0.0;
};

struct SlopeReport {
  ToyModel model = ToyModel::S1_BERNOULLI;
  double slope = 0.0;  // least squares of log var_z against log L
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool ci_wide = false;  // bootstrap CI wider than 0.3 slope units
  std::vector<VarianceRow> rows;
};

// Runs trials per L on per-L windows sized to the scaled support. Requires a
// geometric L ladder of at least 4 values and at least 200 trials. Trial
// streams derive from (seed, model, L index, trial), so any subset can be
// reproduced independently.
SlopeReport variance_scaling(ToyModel model, const TestFunction& h,
                             const std::vector<double>& L_list, int trials,
                             std::uint64_t seed);

// Header: model,L,trials,mean_Z,var_Z,ci_lo,ci_hi
void write_variance_csv(const std::vector<VarianceRow>& rows,
                        const std::string& path);
// Header: model,slope,ci_lo,ci_hi
void write_slopes_csv(const std::vector<SlopeReport>& reports,
                      const std::string& path);

}  // namespace cazp
