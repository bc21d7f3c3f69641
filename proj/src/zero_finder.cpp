#include "cazp/zero_finder.hpp"

#include <algorithm>
#include <cmath>

#include "cazp/rng.hpp"

namespace cazp {

namespace {

double max_coeff_abs(const CoeffVector& c) {
  double m = 0.0;
  for (const cplx& z : c.coeffs) m = std::max(m, std::abs(z));
  return m;
}

// Newton correction p/p' with the shared exponent cancelled. Returns false
// when p' vanishes (safeguarded by the caller with a small kick).
bool newton_correction(const CoeffVector& c, cplx z, cplx& corr, double& log_w) {
  ScaledCplx p, dp;
  evaluate_scaled(c, z, p, dp);
  log_w = p.log_abs() - 0.5 * std::norm(z);
  if (p.is_zero()) {
    corr = {0.0, 0.0};
    return true;
  }
  if (dp.is_zero()) return false;
  const cplx ratio = (dp.mant / p.mant) * std::exp2(double(dp.exp2 - p.exp2));
  if (!std::isfinite(ratio.real()) || !std::isfinite(ratio.imag())) {
    // p astronomically smaller than p': the step is effectively zero.
    corr = {0.0, 0.0};
    return true;
  }
  corr = 1.0 / ratio;
  return true;
}

// Area-uniform start configuration on concentric circles inside |z| ~ sqrt(N),
// where the truncated series holds all its roots.
std::vector<cplx> initial_guesses(int n, std::uint64_t seed) {
  std::vector<cplx> z(static_cast<std::size_t>(n));
  const double rmax = std::sqrt(static_cast<double>(n)) + 1.0;
  const int rings = std::max(1, static_cast<int>(std::ceil(std::sqrt(n / 4.0))));
  int placed = 0;
  for (int m = 0; m < rings && placed < n; ++m) {
    const int left = n - placed;
    int count = (m == rings - 1)
                    ? left
                    : std::max(1, static_cast<int>(std::round(
                          n * (2.0 * m + 1.0) / (rings * double(rings)))));
    count = std::min(count, left);
    const double r = rmax * (m + 0.7) / rings;
    const double a0 = 2.0 * M_PI * uniform01(seed, 0xA13, m);
    for (int j = 0; j < count; ++j) {
      z[static_cast<std::size_t>(placed + j)] =
          r * std::exp(cplx{0.0, a0 + 2.0 * M_PI * j / count});
    }
    placed += count;
  }
  return z;
}

struct AberthResult {
  std::vector<cplx> roots;
  bool converged = false;
};

AberthResult aberth(const CoeffVector& c, std::uint64_t jitter_seed) {
  // Effective degree: the trailing Gaussian coefficient is never exactly 0,
  // but guard anyway.
  int deg = c.degree;
  while (deg > 0 && c.coeffs[static_cast<std::size_t>(deg)] == cplx{0.0, 0.0}) --deg;

  AberthResult out;
  if (deg == 0) {
    out.converged = true;
    return out;
  }
  CoeffVector cc = c;
  cc.degree = deg;
  cc.coeffs.resize(static_cast<std::size_t>(deg) + 1);

  std::vector<cplx> z = initial_guesses(deg, jitter_seed);
  std::vector<char> frozen(static_cast<std::size_t>(deg), 0);
  const int max_iter = 400;
  for (int it = 0; it < max_iter; ++it) {
    int moved = 0;
    for (int i = 0; i < deg; ++i) {
      if (frozen[static_cast<std::size_t>(i)]) continue;
      cplx corr;
      double log_w;
      if (!newton_correction(cc, z[static_cast<std::size_t>(i)], corr, log_w)) {
        z[static_cast<std::size_t>(i)] += cplx{1e-6, 1e-6};
        ++moved;
        continue;
      }
      cplx s{0.0, 0.0};
      for (int j = 0; j < deg; ++j) {
        if (j == i) continue;
        s += 1.0 / (z[static_cast<std::size_t>(i)] - z[static_cast<std::size_t>(j)]);
      }
      const cplx denom = 1.0 - corr * s;
      cplx step = (std::abs(denom) > 1e-300) ? corr / denom : corr;
      // Damp absurd steps from coincident iterates.
      const double cap = 0.5 * (1.0 + std::abs(z[static_cast<std::size_t>(i)]));
      if (std::abs(step) > cap) step *= cap / std::abs(step);
      z[static_cast<std::size_t>(i)] -= step;
      if (std::abs(step) < 1e-13 * (1.0 + std::abs(z[static_cast<std::size_t>(i)])))
        frozen[static_cast<std::size_t>(i)] = 1;
      else
        ++moved;
    }
    if (moved == 0) break;
  }
  out.roots = std::move(z);
  out.converged =
      std::count(frozen.begin(), frozen.end(), char(1)) >= deg - deg / 10;
  return out;
}

}  // namespace

ZeroSet find_zeros_expanding(const GefSample& sample, double disk_radius,
                             double bump, int tries) {
  for (int k = 0;; ++k) {
    try {
      return find_zeros(sample, disk_radius + k * bump);
    } catch (const BoundaryError&) {
      if (k + 1 >= tries) throw;
    }
  }
}

namespace {
// (1/2pi) integral of z psi'/psi dtheta over the circle. The trapezoid rule
// on a periodic integrand is exponentially accurate unless a zero hugs the
// contour; the deviation from an integer exposes that case. Resolvable
// clearance scales like radius/n, hence the node-count parameter.
bool winding_trapezoid(const GefSample& sample, double disk_radius, int n,
                       int& count) {
  cplx acc{0.0, 0.0};
  for (int j = 0; j < n; ++j) {
    const double th = 2.0 * M_PI * j / n;
    const cplx zj = disk_radius * std::exp(cplx{0.0, th});
    ScaledCplx p, dp;
    evaluate_scaled(sample.coeffs, zj, p, dp);
    if (p.is_zero()) return false;
    const cplx ratio = (dp.mant / p.mant) * std::exp2(double(dp.exp2 - p.exp2));
    acc += zj * ratio;
  }
  acc /= static_cast<double>(n);
  const double w = acc.real();
  if (std::abs(w - std::round(w)) > 0.01 || std::abs(acc.imag()) > 0.01)
    return false;
  count = static_cast<int>(std::lround(w));
  return true;
}
}  // namespace

int count_zeros_contour(const GefSample& sample, double disk_radius) {
  if (disk_radius > sample.reliable_radius)
    throw ConfigError("count_zeros_contour: disk exceeds the reliable radius");
  int count = 0;
  if (!winding_trapezoid(sample, disk_radius, 4096, count))
    throw BoundaryError("count_zeros_contour: zero too close to contour");
  return count;
}

ZeroSet find_zeros(const GefSample& sample, double disk_radius) {
  if (disk_radius > sample.reliable_radius)
    throw ConfigError("find_zeros: disk exceeds the reliable radius");

  const CoeffVector& c = sample.coeffs;
  const double zeta_max = max_coeff_abs(c);

  AberthResult ab = aberth(c, c.seed);
  if (!ab.converged) {
    ab = aberth(c, substream(c.seed, 0xBADD));
    if (!ab.converged)
      throw ConvergenceError("find_zeros: simultaneous iteration stalled");
  }

  // Polish candidates near the disk and keep those inside it. The weighted
  // residual target 1e-12 zeta_max is achievable at every radius; the plain
  // residual would drown in evaluation noise ~ e^{|z|^2/2} eps beyond |z|~4.
  const double log_target = std::log(1e-12 * zeta_max);
  std::vector<cplx> kept;
  for (cplx p : ab.roots) {
    if (std::abs(p) > disk_radius + 0.5) continue;
    double log_w = 1.0;
    for (int it = 0; it < 12; ++it) {
      cplx corr;
      if (!newton_correction(c, p, corr, log_w)) break;
      if (log_w <= log_target && std::abs(corr) < 1e-10) break;
      p -= corr;
    }
    {
      ScaledCplx pv, dpv;
      evaluate_scaled(c, p, pv, dpv);
      log_w = pv.log_abs() - 0.5 * std::norm(p);
    }
    if (log_w > log_target) continue;  // stray iterate, not a root
    if (std::abs(std::abs(p) - disk_radius) < 1e-6)
      throw BoundaryError("find_zeros: root within 1e-6 of the disk boundary");
    if (std::abs(p) <= disk_radius) kept.push_back(p);
  }

  // Merge duplicates below the separation floor.
  std::sort(kept.begin(), kept.end(), [](const cplx& a, const cplx& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::vector<cplx> unique;
  for (const cplx& p : kept) {
    bool dupe = false;
    for (auto it = unique.rbegin(); it != unique.rend(); ++it) {
      if (p.real() - it->real() > 1e-6) break;
      if (std::abs(p - *it) < 1e-6) {
        dupe = true;
        break;
      }
    }
    if (!dupe) unique.push_back(p);
  }

  ZeroSet zs;
  zs.disk_radius = disk_radius;
  zs.points = std::move(unique);
  double worst = 0.0;
  for (const cplx& p : zs.points) {
    ScaledCplx pv, dpv;
    evaluate_scaled(c, p, pv, dpv);
    worst = std::max(worst, std::exp(pv.log_abs()));
  }
  zs.residual_bound = worst;

  // Certify the count by the argument principle. The 4096-node rule resolves
  // clearances down to ~radius/900; refine before declaring the boundary
  // blocked, so the boundary signal stays a ~1e-3 per-trial event.
  int contour = -1;
  bool certified = false;
  for (const int n : {4096, 16384, 65536}) {
    if (winding_trapezoid(sample, disk_radius, n, contour)) {
      certified = true;
      break;
    }
  }
  if (!certified)
    throw BoundaryError("find_zeros: zero too close to the disk boundary");
  if (contour != static_cast<int>(zs.points.size()))
    throw ConvergenceError("find_zeros: contour count disagrees with root set");
  return zs;
}

}  // namespace cazp
