#include "cazp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cazp/common.hpp"
#include "cazp/rng.hpp"

namespace cazp {
namespace {

constexpr int kGridPoints = 40;
constexpr int kMinExceed = 20;
constexpr int kBoot = 1000;
constexpr std::uint64_t kBootSeed = 0x7a11;

struct WlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool ok = false;
};

// Weighted least squares of y against x; weights w. r2 is the weighted
// coefficient of determination.
WlsFit wls(const std::vector<double>& x, const std::vector<double>& y,
           const std::vector<double>& w) {
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  if (!(sw > 0.0)) return {};
  double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
    syy += w[i] * (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return {};
  WlsFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxy * sxy) / (sxx * syy);
  f.ok = true;
  return f;
}

// Fit on exceedance counts k_g over the lambda grid; entries below the
// exceedance floor are skipped.
WlsFit fit_counts(const std::vector<double>& lambda2,
                  const std::vector<long>& k, long n) {
  std::vector<double> x, y, w;
  for (std::size_t g = 0; g < lambda2.size(); ++g) {
    if (k[g] < kMinExceed) continue;
    x.push_back(lambda2[g]);
    y.push_back(std::log(static_cast<double>(k[g]) / static_cast<double>(n)));
    w.push_back(static_cast<double>(k[g]));
  }
  if (x.size() < 8) return {};
  return wls(x, y, w);
}

}  // namespace

TailReport fit_gaussian_tail(const std::vector<double>& samples) {
  long n = static_cast<long>(samples.size());
  if (n < 1000)
    throw ConfigError("fit_gaussian_tail: need at least 1000 samples");
  for (double v : samples)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError("fit_gaussian_tail: samples must be finite and nonnegative");

  std::vector<double> sorted(samples);
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back())
    throw Error("fit_gaussian_tail: degenerate input, all samples equal");

  double lo = sorted[static_cast<std::size_t>(n / 2)];
  double hi = sorted[static_cast<std::size_t>(n - kMinExceed - 1)];
  if (!(hi > lo))
    throw Error("fit_gaussian_tail: no resolvable tail above the median");

  TailReport rep;
  rep.n_samples = static_cast<int>(n);
  std::vector<double> lambda2(kGridPoints);
  std::vector<long> k(kGridPoints);
  rep.lambda.resize(kGridPoints);
  rep.survival.resize(kGridPoints);
  for (int g = 0; g < kGridPoints; ++g) {
    lambda2[g] = lo * lo + (hi * hi - lo * lo) * g / (kGridPoints - 1);
    rep.lambda[g] = std::sqrt(lambda2[g]);
    k[g] = n - (std::upper_bound(sorted.begin(), sorted.end(), rep.lambda[g]) -
                sorted.begin());
    rep.survival[g] = static_cast<double>(k[g]) / static_cast<double>(n);
  }

  WlsFit fit = fit_counts(lambda2, k, n);
  if (!fit.ok) throw Error("fit_gaussian_tail: insufficient tail resolution");
  rep.rate = -fit.slope;
  rep.prefactor = std::exp(fit.intercept);
  rep.quality = fit.r2;

  // Bootstrap by resampling bin counts: each sample contributes to every
  // grid point strictly below it, so per-sample bins plus suffix sums give
  // exact exceedance counts per replicate.
  std::vector<int> bin_of(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    bin_of[i] = static_cast<int>(
        std::lower_bound(rep.lambda.begin(), rep.lambda.end(), samples[i]) -
        rep.lambda.begin());
  std::vector<double> rates;
  rates.reserve(kBoot);
  std::vector<long> hist(kGridPoints + 1);
  std::vector<long> kb(kGridPoints);
  for (int b = 0; b < kBoot; ++b) {
    std::fill(hist.begin(), hist.end(), 0);
    for (long t = 0; t < n; ++t) {
      long j = static_cast<long>(uniform01(kBootSeed, static_cast<std::uint64_t>(b),
                                           static_cast<std::uint64_t>(t)) *
                                 static_cast<double>(n));
      hist[static_cast<std::size_t>(bin_of[static_cast<std::size_t>(
          std::min(j, n - 1))])] += 1;
    }
    long acc = 0;
    for (int g = kGridPoints; g-- > 0;) {
      acc += hist[static_cast<std::size_t>(g) + 1];
      kb[static_cast<std::size_t>(g)] = acc;
    }
    WlsFit fb = fit_counts(lambda2, kb, n);
    if (fb.ok) rates.push_back(-fb.slope);
  }
  if (rates.size() >= 100) {
    std::sort(rates.begin(), rates.end());
    rep.rate_lo = rates[static_cast<std::size_t>(0.025 * (rates.size() - 1))];
    rep.rate_hi = rates[static_cast<std::size_t>(0.975 * (rates.size() - 1))];
  } else {
    rep.rate_lo = rep.rate;
    rep.rate_hi = rep.rate;
  }
  return rep;
}

MomentReport exp_moment(const std::vector<double>& samples, double eps) {
  if (!(eps > 0.0)) throw ConfigError("exp_moment: eps must be positive");
  if (samples.empty()) throw ConfigError("exp_moment: no samples");
  long n = static_cast<long>(samples.size());
  std::vector<double> e(samples.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    e[i] = std::exp(eps * samples[i] * samples[i]);
    sum += e[i];
  }
  MomentReport rep;
  rep.n = static_cast<int>(n);
  rep.mean = sum / static_cast<double>(n);

  std::vector<double> desc(e);
  std::sort(desc.begin(), desc.end(), std::greater<>());
  long top = std::max<long>(1, n / 100);
  double top_sum = 0.0;
  for (long i = 0; i < top; ++i) top_sum += desc[static_cast<std::size_t>(i)];
  rep.unstable = !std::isfinite(rep.mean) || top_sum > 0.5 * sum;

  std::vector<double> means;
  means.reserve(kBoot);
  for (int b = 0; b < kBoot; ++b) {
    double s = 0.0;
    for (long t = 0; t < n; ++t) {
      long j = static_cast<long>(uniform01(kBootSeed + 1, static_cast<std::uint64_t>(b),
                                           static_cast<std::uint64_t>(t)) *
                                 static_cast<double>(n));
      s += e[static_cast<std::size_t>(std::min(j, n - 1))];
    }
    means.push_back(s / static_cast<double>(n));
  }
  std::sort(means.begin(), means.end());
  rep.ci_lo = means[static_cast<std::size_t>(0.025 * (means.size() - 1))];
  rep.ci_hi = means[static_cast<std::size_t>(0.975 * (means.size() - 1))];
  return rep;
}

EnvelopeTailReport envelope_tail_check(
    const std::function<GridField(int)>& eta_field, double const_c, int trials) {
  if (trials < 1000)
    throw ConfigError("envelope_tail_check: need at least 1000 trials");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    GridField r = compute_R(eta_field(t), const_c);
    values.push_back(r.value_at(cplx{0.0, 0.0}));
  }
  EnvelopeTailReport rep;
  rep.const_c = const_c;
  rep.trials = trials;
  rep.tail = fit_gaussian_tail(values);
  rep.pass = rep.tail.quality >= 0.9 && rep.tail.rate > 0.0;
  return rep;
}

void write_tails_csv(
    const std::vector<std::pair<std::string, TailReport>>& reports,
    const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("write_tails_csv: cannot open " + path);
  std::fputs("statistic,lambda,survival,fit_rate,fit_prefactor,fit_r2\n", f);
  for (const auto& [name, rep] : reports)
    for (std::size_t i = 0; i < rep.lambda.size(); ++i)
      std::fprintf(f, "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", name.c_str(),
                   rep.lambda[i], rep.survival[i], rep.rate, rep.prefactor,
                   rep.quality);
  std::fclose(f);
}

}  // namespace cazp
