#include "cazp/toy_models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cazp/common.hpp"
#include "cazp/rng.hpp"
#include "cazp/zero_finder.hpp"

namespace cazp {
namespace {

constexpr double kS2Buffer = 6.0;  // displaced entrants beyond this are ~e^-36
constexpr double kSnap = 1e-9;

std::uint64_t model_tag(ToyModel m) {
  switch (m) {
    case ToyModel::GEF: return 1;
    case ToyModel::S1_BERNOULLI: return 2;
    case ToyModel::S2_GAUSSIAN_LATTICE: return 3;
  }
  return 0;
}

// Bijective 64-bit key per lattice site, window-independent: growing the
// window never changes an existing site's draws.
std::uint64_t site_key(long k, long l) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(l));
}

// Largest disk around the origin inside the rect; 0 when the origin is
// outside. Linear statistics are centered at the origin, so this is the
// radius that matters for support coverage.
double origin_inradius(const Rect& w) {
  return std::max(0.0, std::min(std::min(w.x1, -w.x0), std::min(w.y1, -w.y0)));
}

void check_window(const Rect& w, const char* who) {
  if (!(w.x0 < w.x1) || !(w.y0 < w.y1))
    throw ConfigError(std::string(who) + ": degenerate window");
}

long lo_index(double x, double a) { return std::lround(std::ceil(x / a - kSnap)); }
long hi_index(double x, double a) { return std::lround(std::floor(x / a + kSnap)); }

}  // namespace

const char* model_name(ToyModel m) {
  switch (m) {
    case ToyModel::GEF: return "gef";
    case ToyModel::S1_BERNOULLI: return "s1_bernoulli";
    case ToyModel::S2_GAUSSIAN_LATTICE: return "s2_gaussian_lattice";
  }
  return "unknown";
}

void recompute_norms(TestFunction& f, double step) {
  if (!(step > 0.0) || step > f.support_radius)
    throw ConfigError("recompute_norms: bad quadrature step");
  double i0 = 0.0, h2 = 0.0, g2 = 0.0, l2 = 0.0;
  for (double r = 0.5 * step; r < f.support_radius; r += step) {
    double w = 2.0 * M_PI * r * step;
    double h = f.radial(r);
    double d1 = f.radial_d1(r);
    double lap = f.radial_d2(r) + d1 / r;
    i0 += w * h;
    h2 += w * h * h;
    g2 += w * d1 * d1;
    l2 += w * lap * lap;
  }
  f.integral = i0;
  f.norm_h2 = h2;
  f.norm_grad2 = g2;
  f.norm_lap2 = l2;
}

TestFunction bump_function(double quad_step) {
  TestFunction f;
  f.name = "bump";
  f.support_radius = 1.0;
  f.radial = [](double r) {
    double u = 1.0 - r * r;
    return u * u * u;
  };
  f.radial_d1 = [](double r) {
    double u = 1.0 - r * r;
    return -6.0 * r * u * u;
  };
  f.radial_d2 = [](double r) {
    double u = 1.0 - r * r;
    return -6.0 * u * u + 24.0 * r * r * u;
  };
  recompute_norms(f, quad_step);
  return f;
}

TestFunction gaussian_bump_function(double quad_step) {
  TestFunction f;
  f.name = "gaussian_bump";
  f.support_radius = 1.0;
  // h = e^{-2r^2} (1-r^2)^3; dh/dr = e^{-2r^2} Q with
  // Q = -2r(1-r^2)^2(5-2r^2); d2h/dr2 = e^{-2r^2} (Q' - 4rQ).
  auto q = [](double r) {
    double r2 = r * r;
    return r * (-10.0 + r2 * (24.0 + r2 * (-18.0 + r2 * 4.0)));
  };
  auto qp = [](double r) {
    double r2 = r * r;
    return -10.0 + r2 * (72.0 + r2 * (-90.0 + r2 * 28.0));
  };
  f.radial = [](double r) {
    double u = 1.0 - r * r;
    return std::exp(-2.0 * r * r) * u * u * u;
  };
  f.radial_d1 = [q](double r) { return std::exp(-2.0 * r * r) * q(r); };
  f.radial_d2 = [q, qp](double r) {
    return std::exp(-2.0 * r * r) * (qp(r) - 4.0 * r * q(r));
  };
  recompute_norms(f, quad_step);
  return f;
}

TestFunction scaled_support(const TestFunction& f, double s, double quad_step) {
  if (!(s > 0.0)) throw ConfigError("scaled_support: scale must be positive");
  TestFunction g;
  g.name = f.name + "_x" + std::to_string(s);
  g.support_radius = s * f.support_radius;
  auto r0 = f.radial;
  auto r1 = f.radial_d1;
  auto r2 = f.radial_d2;
  g.radial = [r0, s](double r) { return r0(r / s); };
  g.radial_d1 = [r1, s](double r) { return r1(r / s) / s; };
  g.radial_d2 = [r2, s](double r) { return r2(r / s) / (s * s); };
  recompute_norms(g, quad_step);
  return g;
}

PointProcessSample sample_process(ToyModel model, const Rect& window,
                                  std::uint64_t seed, double deletion_prob,
                                  double eta_scale) {
  check_window(window, "sample_process");
  PointProcessSample s;
  s.model = model;
  s.window = window;
  s.seed = seed;
  s.covered_radius = origin_inradius(window);
  std::uint64_t mseed = substream(seed, 0x70 + model_tag(model));

  if (model == ToyModel::S1_BERNOULLI) {
    double a = std::sqrt(M_PI / 2.0);
    for (long l = lo_index(window.y0, a); l <= hi_index(window.y1, a); ++l)
      for (long k = lo_index(window.x0, a); k <= hi_index(window.x1, a); ++k)
        if (uniform01(mseed, site_key(k, l), 0) >= deletion_prob)
          s.points.push_back(cplx{k * a, l * a});
    return s;
  }

  if (model == ToyModel::S2_GAUSSIAN_LATTICE) {
    double b = std::sqrt(M_PI);
    for (long l = lo_index(window.y0 - kS2Buffer, b);
         l <= hi_index(window.y1 + kS2Buffer, b); ++l)
      for (long k = lo_index(window.x0 - kS2Buffer, b);
           k <= hi_index(window.x1 + kS2Buffer, b); ++k) {
        cplx p = cplx{k * b, l * b} +
                 eta_scale * complex_gaussian(mseed, site_key(k, l), 0);
        if (window.contains(p)) s.points.push_back(p);
      }
    return s;
  }

  if (std::abs(window.x0 + window.x1) > 1e-9 ||
      std::abs(window.y0 + window.y1) > 1e-9)
    throw ConfigError(
        "sample_process: zero process window must be centered at the origin");
  double r = std::min(window.x1, window.y1);
  if (!(r > 0.5))
    throw ConfigError("sample_process: zero process window too small");
  GefSample g = make_sample(mseed, r + 0.5);
  ZeroSet zs = find_zeros_expanding(g, r);
  for (cplx z : zs.points)
    if (std::abs(z) <= r) s.points.push_back(z);
  s.covered_radius = r;
  return s;
}

double linear_statistic(const PointProcessSample& s, const TestFunction& h,
                        double L) {
  if (!(L > 0.0)) throw ConfigError("linear_statistic: L must be positive");
  double root = std::sqrt(L);
  if (h.support_radius * root > s.covered_radius + 1e-9)
    throw ConfigError(
        "linear_statistic: sample window does not cover the scaled support");
  double z = 0.0;
  for (cplx p : s.points) z += h.value(p / root);
  return z;
}

namespace {

double sample_var(const std::vector<double>& x) {
  std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(n - 1);
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  std::size_t i = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
  return v[i];
}

// Least squares slope of log(var) against log(L).
double log_slope(const std::vector<double>& l_list, const std::vector<double>& vars) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  double n = static_cast<double>(l_list.size());
  for (std::size_t i = 0; i < l_list.size(); ++i) {
    double x = std::log(l_list[i]);
    double y = std::log(std::max(vars[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

SlopeReport variance_scaling(ToyModel model, const TestFunction& h,
                             const std::vector<double>& L_list, int trials,
                             std::uint64_t seed) {
  if (L_list.size() < 4)
    throw ConfigError("variance_scaling: need at least 4 values of L");
  for (double L : L_list)
    if (!(L > 0.0)) throw ConfigError("variance_scaling: L must be positive");
  double ratio = L_list[1] / L_list[0];
  for (std::size_t i = 0; i + 1 < L_list.size(); ++i)
    if (std::abs(L_list[i + 1] / L_list[i] - ratio) > 1e-9 * ratio)
      throw ConfigError("variance_scaling: L ladder must be geometric");
  if (trials < 200)
    throw ConfigError("variance_scaling: need at least 200 trials per L");

  SlopeReport rep;
  rep.model = model;
  std::vector<std::vector<double>> z(L_list.size());
  for (std::size_t li = 0; li < L_list.size(); ++li) {
    double half = h.support_radius * std::sqrt(L_list[li]);
    Rect win{-half, -half, half, half};
    std::uint64_t lseed = substream(substream(seed, model_tag(model) + 11), li);
    z[li].resize(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
      PointProcessSample s =
          sample_process(model, win, substream(lseed, static_cast<std::uint64_t>(t)));
      z[li][static_cast<std::size_t>(t)] = linear_statistic(s, h, L_list[li]);
    }
  }

  std::vector<double> vars(L_list.size());
  rep.rows.resize(L_list.size());
  for (std::size_t li = 0; li < L_list.size(); ++li) {
    double mean = 0.0;
    for (double v : z[li]) mean += v;
    mean /= static_cast<double>(trials);
    vars[li] = sample_var(z[li]);
    rep.rows[li] = {model, L_list[li], trials, mean, vars[li], 0.0, 0.0};
  }
  rep.slope = log_slope(L_list, vars);

  // One set of resamples feeds both the per-L variance CIs and the slope CI.
  const int kBoot = 1000;
  std::uint64_t bseed = substream(seed, 0xb007);
  std::vector<std::vector<double>> var_b(L_list.size(),
                                         std::vector<double>(kBoot));
  std::vector<double> slope_b(kBoot);
  std::vector<double> resampled(static_cast<std::size_t>(trials));
  std::vector<double> bv(L_list.size());
  for (int b = 0; b < kBoot; ++b) {
    for (std::size_t li = 0; li < L_list.size(); ++li) {
      for (int t = 0; t < trials; ++t) {
        int j = static_cast<int>(uniform01(bseed, static_cast<std::uint64_t>(b),
                                           static_cast<std::uint64_t>(t), li) *
                                 trials);
        resampled[static_cast<std::size_t>(t)] =
            z[li][static_cast<std::size_t>(std::min(j, trials - 1))];
      }
      bv[li] = sample_var(resampled);
      var_b[li][static_cast<std::size_t>(b)] = bv[li];
    }
    slope_b[static_cast<std::size_t>(b)] = log_slope(L_list, bv);
  }
  for (std::size_t li = 0; li < L_list.size(); ++li) {
    rep.rows[li].ci_lo = percentile(var_b[li], 0.025);
    rep.rows[li].ci_hi = percentile(var_b[li], 0.975);
  }
  rep.ci_lo = percentile(slope_b, 0.025);
  rep.ci_hi = percentile(slope_b, 0.975);
  rep.ci_wide = (rep.ci_hi - rep.ci_lo) > 0.3;
  return rep;
}

void write_variance_csv(const std::vector<VarianceRow>& rows,
                        const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("write_variance_csv: cannot open " + path);
  std::fputs("model,L,trials,mean_Z,var_Z,ci_lo,ci_hi\n", f);
  for (const VarianceRow& r : rows)
    std::fprintf(f, "%s,%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", model_name(r.model),
                 r.L, r.trials, r.mean_z, r.var_z, r.ci_lo, r.ci_hi);
  std::fclose(f);
}

void write_slopes_csv(const std::vector<SlopeReport>& reports,
                      const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("write_slopes_csv: cannot open " + path);
  std::fputs("model,slope,ci_lo,ci_hi\n", f);
  for (const SlopeReport& r : reports)
    std::fprintf(f, "%s,%.17g,%.17g,%.17g\n", model_name(r.model), r.slope,
                 r.ci_lo, r.ci_hi);
  std::fclose(f);
}

}  // namespace cazp
