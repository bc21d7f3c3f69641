#include "cazp/potential_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace cazp {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

bool GridField::contains(cplx z, double margin) const {
  const double x = (z.real() - origin.real()) / spacing;
  const double y = (z.imag() - origin.imag()) / spacing;
  const double m = margin / spacing;
  return x >= m && y >= m && x <= nx - 1 - m && y <= ny - 1 - m;
}

double GridField::value_at(cplx z) const {
  const double fx = (z.real() - origin.real()) / spacing;
  const double fy = (z.imag() - origin.imag()) / spacing;
  const int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, nx - 2);
  const int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, ny - 2);
  const double tx = fx - ix;
  const double ty = fy - iy;
  return (1 - tx) * (1 - ty) * at(ix, iy) + tx * (1 - ty) * at(ix + 1, iy) +
         (1 - tx) * ty * at(ix, iy + 1) + tx * ty * at(ix + 1, iy + 1);
}

GridField make_grid(cplx center, double halfwidth, double spacing) {
  GridField g;
  const int half = static_cast<int>(std::ceil(halfwidth / spacing - 1e-9));
  g.spacing = spacing;
  g.nx = 2 * half + 1;
  g.ny = g.nx;
  g.origin = center - cplx{half * spacing, half * spacing};
  g.values.assign(static_cast<std::size_t>(g.nx) * g.ny, 0.0);
  return g;
}

std::size_t CellMask::count() const {
  std::size_t n = 0;
  for (std::uint8_t b : bits) n += b;
  return n;
}

double MollifierKernel::value_at(cplx offset) const {
  const double r2 = std::norm(offset) / (radius * radius);
  if (r2 >= 1.0) return 0.0;
  return norm * std::exp(-1.0 / (1.0 - r2));
}

MollifierKernel make_kernel(double spacing, double radius) {
  if (!(radius > 0.0) || !(spacing > 0.0) || radius < 2.0 * spacing)
    throw ConfigError("make_kernel: need radius > 0 resolved by the spacing");
  MollifierKernel k;
  k.radius = radius;
  k.spacing = spacing;
  k.half_cells = static_cast<int>(std::floor(radius / spacing));
  const int w = 2 * k.half_cells + 1;
  k.stamp.assign(static_cast<std::size_t>(w) * w, 0.0);
  double raw_sum = 0.0;
  for (int dy = -k.half_cells; dy <= k.half_cells; ++dy)
    for (int dx = -k.half_cells; dx <= k.half_cells; ++dx) {
      const double r2 =
          (dx * dx + dy * dy) * spacing * spacing / (radius * radius);
      const double v = (r2 < 1.0) ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
      k.stamp[static_cast<std::size_t>(dy + k.half_cells) * w +
              (dx + k.half_cells)] = v;
      raw_sum += v;
    }
  k.norm = 1.0 / (raw_sum * spacing * spacing);
  for (double& v : k.stamp) v *= k.norm;
  return k;
}

GridField potential_grid(const GefSample& sample, cplx center, double halfwidth,
                         double spacing) {
  GridField g = make_grid(center, halfwidth, spacing);
  // Degree cap per radius band of width 1; the discarded tail stays below
  // the sample's truncation tolerance at the band's outer edge.
  const double corner =
      std::abs(g.coord(g.nx - 1, g.ny - 1) - g.coord(g.nx / 2, g.ny / 2));
  std::vector<int> band_degree(static_cast<std::size_t>(corner) + 2);
  for (std::size_t b = 0; b < band_degree.size(); ++b)
    band_degree[b] = std::min(
        sample.coeffs.degree,
        truncation_degree(static_cast<double>(b + 1), sample.truncation_tol));
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const cplx z = g.coord(ix, iy);
      const int cap =
          band_degree[static_cast<std::size_t>(std::min(
              static_cast<double>(band_degree.size() - 1), std::abs(z)))];
      ScaledCplx p, dp;
      evaluate_scaled(sample.coeffs, z, p, dp, cap);
      g.at(ix, iy) = 0.5 * p.log_abs() - 0.25 * std::norm(z);
    }
  return g;
}

PatchedField patch_minus_inf(const GridField& field) {
  PatchedField out;
  out.field = field;
  for (int iy = 0; iy < field.ny; ++iy)
    for (int ix = 0; ix < field.nx; ++ix) {
      if (field.at(ix, iy) != kNegInf) continue;
      double repl = std::numeric_limits<double>::infinity();
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int jx = ix + dx, jy = iy + dy;
          if (jx < 0 || jy < 0 || jx >= field.nx || jy >= field.ny) continue;
          const double w = field.at(jx, jy);
          if (std::isfinite(w)) repl = std::min(repl, w);
        }
      if (!std::isfinite(repl))
        throw ConfigError("patch_minus_inf: isolated -inf cluster");
      out.field.at(ix, iy) = repl;
      ++out.patched;
    }
  return out;
}

PatchedField absolute_patched(const GridField& field) {
  PatchedField out = patch_minus_inf(field);
  for (double& v : out.field.values) v = std::abs(v);
  return out;
}

GridField convolve(const GridField& field, const MollifierKernel& kernel) {
  const int hc = kernel.half_cells;
  if (std::abs(kernel.spacing - field.spacing) > 1e-12 * field.spacing)
    throw ConfigError("convolve: kernel sampled at a different spacing");
  const int onx = field.nx - 2 * hc;
  const int ony = field.ny - 2 * hc;
  if (onx <= 0 || ony <= 0)
    throw ConfigError("convolve: kernel support exceeds the field extent");
  GridField out;
  out.spacing = field.spacing;
  out.nx = onx;
  out.ny = ony;
  out.origin = field.origin + cplx{hc * field.spacing, hc * field.spacing};
  out.values.assign(static_cast<std::size_t>(onx) * ony, 0.0);
  const double cell = field.spacing * field.spacing;
  const int w = 2 * hc + 1;
  for (int oy = 0; oy < ony; ++oy)
    for (int ox = 0; ox < onx; ++ox) {
      double acc = 0.0;
      for (int dy = -hc; dy <= hc; ++dy) {
        const double* frow = &field.values[static_cast<std::size_t>(oy + hc + dy) *
                                           field.nx];
        const double* srow =
            &kernel.stamp[static_cast<std::size_t>(dy + hc) * w];
        for (int dx = -hc; dx <= hc; ++dx)
          acc += frow[ox + hc + dx] * srow[dx + hc];
      }
      out.at(ox, oy) = acc * cell;
    }
  return out;
}

GridField compute_R(const GridField& abs_phi_smoothed, double const_c) {
  if (!(const_c > 0.0)) throw ConfigError("compute_R: const_c must be positive");
  const GridField& F = abs_phi_smoothed;
  const double h = F.spacing;

  // g(w) = sqrt(const_c (1 + F(w))); the envelope support around z is
  // bounded by gmax - sqrt(const_c), since beyond it no node can beat the
  // floor value attained at w = z.
  GridField g = F;
  double gmax = 0.0;
  for (double& v : g.values) {
    if (!std::isfinite(v)) throw ConfigError("compute_R: field must be finite");
    v = std::sqrt(const_c * (1.0 + v));
    gmax = std::max(gmax, v);
  }
  const double floor = std::sqrt(const_c);
  const int reach = static_cast<int>(std::ceil((gmax - floor) / h)) + 1;

  // Offsets sorted by distance; the scan stops once gmax - dist can no
  // longer exceed the best value found.
  struct Off {
    int dx, dy;
    double dist;
  };
  std::vector<Off> offs;
  offs.reserve(static_cast<std::size_t>(4 * reach) * reach);
  for (int dy = -reach; dy <= reach; ++dy)
    for (int dx = -reach; dx <= reach; ++dx) {
      const double d = std::hypot(dx, dy) * h;
      if (d <= gmax - floor + h) offs.push_back({dx, dy, d});
    }
  std::sort(offs.begin(), offs.end(),
            [](const Off& a, const Off& b) { return a.dist < b.dist; });

  GridField R = F;
  for (int iy = 0; iy < F.ny; ++iy)
    for (int ix = 0; ix < F.nx; ++ix) {
      double best = g.at(ix, iy);
      for (const Off& o : offs) {
        if (gmax - o.dist <= best) break;
        const int jx = ix + o.dx, jy = iy + o.dy;
        if (jx < 0 || jy < 0 || jx >= F.nx || jy >= F.ny) continue;
        best = std::max(best, g.at(jx, jy) - o.dist);
      }
      R.at(ix, iy) = best;
    }
  return R;
}

GridField laplacian_u(const ZeroSet& zeros, const MollifierKernel& kernel,
                      const GridField& shape) {
  GridField out = shape;
  std::fill(out.values.begin(), out.values.end(), -1.0);
  const double h = shape.spacing;
  for (const cplx& z : zeros.points) {
    const double fx = (z.real() - shape.origin.real()) / h;
    const double fy = (z.imag() - shape.origin.imag()) / h;
    const int x0 = std::max(0, static_cast<int>(std::ceil(fx - kernel.radius / h)));
    const int x1 = std::min(shape.nx - 1,
                            static_cast<int>(std::floor(fx + kernel.radius / h)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(fy - kernel.radius / h)));
    const int y1 = std::min(shape.ny - 1,
                            static_cast<int>(std::floor(fy + kernel.radius / h)));
    for (int iy = y0; iy <= y1; ++iy)
      for (int ix = x0; ix <= x1; ++ix)
        out.at(ix, iy) += M_PI * kernel.value_at(shape.coord(ix, iy) - z);
  }
  return out;
}

GridField indicator_smoothed(const CellMask& U, const GridField& geom,
                             const MollifierKernel& kernel) {
  if (U.nx != geom.nx || U.ny != geom.ny)
    throw ConfigError("indicator_smoothed: mask shape mismatch");
  GridField ind = geom;
  for (int iy = 0; iy < geom.ny; ++iy)
    for (int ix = 0; ix < geom.nx; ++ix)
      ind.at(ix, iy) = U.test(ix, iy) ? 1.0 : 0.0;
  return convolve(ind, kernel);
}

double integrate(const GridField& field) {
  const double cell = field.spacing * field.spacing;
  return std::accumulate(field.values.begin(), field.values.end(), 0.0) * cell;
}

double integrate(const GridField& field, const CellMask& over) {
  if (over.nx != field.nx || over.ny != field.ny)
    throw ConfigError("integrate: mask shape mismatch");
  const double cell = field.spacing * field.spacing;
  double acc = 0.0;
  for (int iy = 0; iy < field.ny; ++iy)
    for (int ix = 0; ix < field.nx; ++ix)
      if (over.test(ix, iy)) acc += field.at(ix, iy);
  return acc * cell;
}

void write_csv(const GridField& field, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("write_csv: cannot open " + path);
  std::fprintf(f, "x,y,value\n");
  for (int iy = 0; iy < field.ny; ++iy)
    for (int ix = 0; ix < field.nx; ++ix) {
      const cplx z = field.coord(ix, iy);
      std::fprintf(f, "%.10g,%.10g,%.17g\n", z.real(), z.imag(),
                   field.at(ix, iy));
    }
  std::fclose(f);
}

void write_raster(const GridField& field, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw ConfigError("write_raster: cannot open " + path);
  const double head[3] = {field.origin.real(), field.origin.imag(),
                          field.spacing};
  const std::int64_t dims[2] = {field.nx, field.ny};
  std::fwrite(head, sizeof(double), 3, f);
  std::fwrite(dims, sizeof(std::int64_t), 2, f);
  std::fwrite(field.values.data(), sizeof(double), field.values.size(), f);
  std::fclose(f);
}

GridField read_raster(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw ConfigError("read_raster: cannot open " + path);
  double head[3];
  std::int64_t dims[2];
  GridField g;
  if (std::fread(head, sizeof(double), 3, f) != 3 ||
      std::fread(dims, sizeof(std::int64_t), 2, f) != 2) {
    std::fclose(f);
    throw ConfigError("read_raster: truncated header in " + path);
  }
  g.origin = {head[0], head[1]};
  g.spacing = head[2];
  g.nx = static_cast<int>(dims[0]);
  g.ny = static_cast<int>(dims[1]);
  g.values.resize(static_cast<std::size_t>(g.nx) * g.ny);
  const std::size_t got =
      std::fread(g.values.data(), sizeof(double), g.values.size(), f);
  std::fclose(f);
  if (got != g.values.size())
    throw ConfigError("read_raster: truncated payload in " + path);
  return g;
}

}  // namespace cazp
