#include "cazp/basin_transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "cazp/common.hpp"
#include "cazp/rng.hpp"

namespace cazp {
namespace {

constexpr double kCaptureRadius = 1e-3;
constexpr double kSnapConfirm = 1e-6;
constexpr double kStepTol = 1e-8;
constexpr double kRiseTol = 1e-8;
constexpr double kStallGrad = 1e-8;
constexpr double kPerturb = 1e-6;
constexpr double kMaxDisplacement = 0.1;
constexpr double kStageReach = 1.0;
constexpr double kTravelMargin = 2.0;

// Dormand-Prince 5(4) tableau; seven stages, no FSAL reuse.
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                 kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                 kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                 kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = kB1 - 5179.0 / 57600.0, kE3 = kB3 - 7571.0 / 16695.0,
                 kE4 = kB4 - 393.0 / 640.0, kE5 = kB5 + 92097.0 / 339200.0,
                 kE6 = kB6 - 187.0 / 2100.0, kE7 = -1.0 / 40.0;

struct GradEval {
  cplx f{0.0, 0.0};
  bool landed = false;  // weighted modulus underflow: z sits on a zero
};

GradEval descent_field(const CoeffVector& c, cplx z) {
  try {
    return {-gradient_potential(c, z), false};
  } catch (const NearZeroError&) {
    return {cplx{0.0, 0.0}, true};
  }
}

cplx newton_snap(const CoeffVector& c, cplx z) {
  for (int it = 0; it < 12; ++it) {
    ScaledCplx p, dp;
    evaluate_scaled(c, z, p, dp);
    if (p.is_zero()) return z;
    if (dp.is_zero()) return z;
    cplx ratio = p.mant / dp.mant;
    double s = std::ldexp(1.0, static_cast<int>(
                                   std::clamp(p.exp2 - dp.exp2, -1060L, 1060L)));
    cplx step = ratio * s;
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return z;
    z -= step;
    if (std::abs(step) < 1e-13) break;
  }
  return z;
}

int nearest_zero(const ZeroSet& zeros, cplx z, double* dist) {
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < zeros.points.size(); ++j) {
    double d = std::abs(zeros.points[j] - z);
    if (d < bd) {
      bd = d;
      best = static_cast<int>(j);
    }
  }
  if (dist) *dist = bd;
  return best;
}

// -3 when not captured; otherwise the confirmed zero index. `on_zero` relaxes
// the entry radius: z already underflowed the weighted modulus, so only the
// catalogue lookup after the snap decides.
int try_capture(const CoeffVector& c, const ZeroSet& zeros, cplx z, bool on_zero) {
  double d = 0.0;
  int j = nearest_zero(zeros, z, &d);
  if (j < 0) return -3;
  if (!on_zero && d > kCaptureRadius) return -3;
  cplx zn = newton_snap(c, z);
  if (!std::isfinite(zn.real()) || !std::isfinite(zn.imag())) return -3;
  double dn = 0.0;
  int jn = nearest_zero(zeros, zn, &dn);
  if (dn <= kSnapConfirm) return jn;
  return -3;
}

}  // namespace

FlowResult flow_to_zero(const GefSample& sample, cplx start, const ZeroSet& zeros,
                        int max_steps) {
  const CoeffVector& c = sample.coeffs;
  FlowResult res;
  res.end = start;
  cplx z = start;
  double dt = 0.01;
  int perturbs_left = 3;

  while (res.steps < max_steps) {
    if (std::abs(z) > sample.reliable_radius) {
      res.label = kEscaped;
      res.end = z;
      return res;
    }
    GradEval g1 = descent_field(c, z);
    int cap = try_capture(c, zeros, z, g1.landed);
    if (cap >= 0) {
      res.label = cap;
      res.end = z;
      return res;
    }
    if (g1.landed) {
      // On an uncatalogued zero: no confirmable label exists.
      res.label = kUnresolved;
      res.end = z;
      return res;
    }
    double speed = std::abs(g1.f);
    if (speed < kStallGrad) {
      if (perturbs_left-- > 0) {
        double ang = 2.0 * M_PI *
                     uniform01(c.seed ^ 0xba51ba51u, static_cast<std::uint64_t>(res.steps),
                               static_cast<std::uint64_t>(3 - perturbs_left));
        z += kPerturb * cplx{std::cos(ang), std::sin(ang)};
        continue;
      }
      res.label = kUnresolved;
      res.end = z;
      return res;
    }

    double phi0 = evaluate_potential(c, z);
    dt = std::min(dt, kMaxDisplacement * std::min(1.0, 1.0 / speed));
    bool advanced = false;
    bool teleported = false;
    while (!advanced && !teleported) {
      // 0 usable, 1 landed on a zero within short reach (z updated), 2 the
      // stage point is unusable: non-finite, beyond the stage reach, or a
      // far landing. Gradients blow up 1/d near zeros, so a stage can
      // overshoot arbitrarily; those attempts must be rejected, never taken
      // as positions.
      auto stage = [&](cplx zs, cplx& kout) -> int {
        double jump = std::abs(zs - z);
        if (!std::isfinite(jump) || jump > kStageReach) return 2;
        GradEval e = descent_field(c, zs);
        if (e.landed) {
          if (jump <= 3.0 * kMaxDisplacement) {
            z = zs;
            return 1;
          }
          return 2;
        }
        kout = e.f;
        return std::isfinite(kout.real()) && std::isfinite(kout.imag()) ? 0 : 2;
      };
      cplx k1 = g1.f, k2, k3, k4, k5, k6, k7;
      int st = stage(z + dt * kA21 * k1, k2);
      if (st == 0) st = stage(z + dt * (kA31 * k1 + kA32 * k2), k3);
      if (st == 0) st = stage(z + dt * (kA41 * k1 + kA42 * k2 + kA43 * k3), k4);
      if (st == 0)
        st = stage(z + dt * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4), k5);
      if (st == 0)
        st = stage(z + dt * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 +
                             kA65 * k5),
                   k6);
      cplx znew = z + dt * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
      if (st == 0) st = stage(znew, k7);
      if (st == 1) {
        teleported = true;
        break;
      }
      if (st == 2) {
        dt *= 0.2;
      } else {
        double err = std::abs(dt * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 +
                                    kE6 * k6 + kE7 * k7));
        double tol = kStepTol * std::max(1.0, std::abs(z));
        double phi1 = evaluate_potential(c, znew);
        bool phi_ok = !(phi1 > phi0 + kRiseTol);
        if (err <= tol && phi_ok) {
          res.max_rise = std::max(res.max_rise, phi1 - phi0);
          z = znew;
          res.steps += 1;
          advanced = true;
          double fac = 0.9 * std::pow(tol / std::max(err, 1e-300), 0.2);
          dt *= std::clamp(fac, 0.2, 5.0);
        } else if (!phi_ok) {
          dt *= 0.5;
        } else {
          double fac = 0.9 * std::pow(tol / err, 0.2);
          dt *= std::clamp(fac, 0.2, 0.9);
        }
      }
      if (!advanced && dt < 1e-12) {
        // Step collapse behaves like a stall.
        if (perturbs_left-- > 0) {
          double ang = 2.0 * M_PI *
                       uniform01(c.seed ^ 0xba51ba51u,
                                 static_cast<std::uint64_t>(res.steps) + 7919,
                                 static_cast<std::uint64_t>(3 - perturbs_left));
          z += kPerturb * cplx{std::cos(ang), std::sin(ang)};
          dt = 1e-6;
          break;
        }
        res.label = kUnresolved;
        res.end = z;
        return res;
      }
    }
  }
  res.label = kUnresolved;
  res.end = z;
  return res;
}

BasinMap basin_partition(const GefSample& sample, const ZeroSet& zeros,
                         const GridField& grid, int max_steps) {
  if (grid.nx <= 0 || grid.ny <= 0)
    throw ConfigError("basin_partition: empty grid");
  double max_x = std::max(std::abs(grid.origin.real()),
                          std::abs(grid.origin.real() + (grid.nx - 1) * grid.spacing));
  double max_y = std::max(std::abs(grid.origin.imag()),
                          std::abs(grid.origin.imag() + (grid.ny - 1) * grid.spacing));
  double corner = std::hypot(max_x, max_y);
  if (corner > sample.reliable_radius)
    throw ConfigError("basin_partition: grid leaves the sample's reliable disk");
  if (zeros.disk_radius < corner + kTravelMargin)
    throw ConfigError(
        "basin_partition: zero catalogue must cover the window plus a travel "
        "margin of 2");

  BasinMap map;
  map.origin = grid.origin;
  map.spacing = grid.spacing;
  map.nx = grid.nx;
  map.ny = grid.ny;
  map.labels.assign(static_cast<std::size_t>(grid.nx) * grid.ny, kUnresolved);
  map.basins.resize(zeros.points.size());
  for (std::size_t j = 0; j < zeros.points.size(); ++j)
    map.basins[j].zero = zeros.points[j];

  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      FlowResult r = flow_to_zero(sample, grid.coord(ix, iy), zeros, max_steps);
      map.labels[static_cast<std::size_t>(iy) * grid.nx + ix] = r.label;
      map.max_phi_rise = std::max(map.max_phi_rise, r.max_rise);
      if (r.label >= 0) {
        BasinStats& b = map.basins[static_cast<std::size_t>(r.label)];
        b.cells += 1;
        if (ix == 0 || iy == 0 || ix == grid.nx - 1 || iy == grid.ny - 1)
          b.boundary = true;
      } else if (r.label == kEscaped) {
        map.escaped_cells += 1;
      } else {
        map.unresolved_cells += 1;
      }
    }
  }

  double cell_area = grid.spacing * grid.spacing;
  map.escaped_area = cell_area * map.escaped_cells;
  map.unresolved_area = cell_area * map.unresolved_cells;
  for (BasinStats& b : map.basins) b.area = cell_area * b.cells;

  // Diameter over boundary cells: a cell on the grid edge or with a
  // differently labelled 4-neighbour.
  std::vector<std::vector<cplx>> rim(zeros.points.size());
  auto lab = [&](int ix, int iy) {
    return map.labels[static_cast<std::size_t>(iy) * grid.nx + ix];
  };
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      int l = lab(ix, iy);
      if (l < 0) continue;
      bool edge = ix == 0 || iy == 0 || ix == grid.nx - 1 || iy == grid.ny - 1;
      if (!edge && lab(ix - 1, iy) == l && lab(ix + 1, iy) == l &&
          lab(ix, iy - 1) == l && lab(ix, iy + 1) == l)
        continue;
      rim[static_cast<std::size_t>(l)].push_back(grid.coord(ix, iy));
    }
  }
  for (std::size_t j = 0; j < rim.size(); ++j) {
    double dia = 0.0;
    const std::vector<cplx>& pts = rim[j];
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = a + 1; b < pts.size(); ++b)
        dia = std::max(dia, std::abs(pts[a] - pts[b]));
    map.basins[j].diameter = dia;
  }
  return map;
}

GridField label_field(const BasinMap& map) {
  GridField g;
  g.origin = map.origin;
  g.spacing = map.spacing;
  g.nx = map.nx;
  g.ny = map.ny;
  g.values.resize(map.labels.size());
  for (std::size_t i = 0; i < map.labels.size(); ++i)
    g.values[i] = static_cast<double>(map.labels[i]);
  return g;
}

std::vector<BasinRow> basin_rows(const BasinMap& map, int trial) {
  std::vector<BasinRow> rows;
  for (const BasinStats& b : map.basins) {
    if (b.cells == 0) continue;
    rows.push_back({trial, b.zero.real(), b.zero.imag(), b.area, b.diameter,
                    b.boundary ? 1 : 0});
  }
  return rows;
}

void write_basins_csv(const std::vector<BasinRow>& rows, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("write_basins_csv: cannot open " + path);
  std::fputs("trial,zero_re,zero_im,area,diameter,boundary_flag\n", f);
  for (const BasinRow& r : rows)
    std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%d\n", r.trial, r.zero_re,
                 r.zero_im, r.area, r.diameter, r.boundary_flag);
  std::fclose(f);
}

std::vector<BasinRow> read_basins_csv(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) throw Error("read_basins_csv: cannot open " + path);
  std::vector<BasinRow> rows;
  char line[512];
  bool first = true;
  while (std::fgets(line, sizeof line, f)) {
    if (first) {
      first = false;
      continue;
    }
    BasinRow r;
    if (std::sscanf(line, "%d,%lf,%lf,%lf,%lf,%d", &r.trial, &r.zero_re,
                    &r.zero_im, &r.area, &r.diameter, &r.boundary_flag) == 6)
      rows.push_back(r);
  }
  std::fclose(f);
  return rows;
}

}  // namespace cazp
