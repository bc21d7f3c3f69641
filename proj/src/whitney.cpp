#include "cazp/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cazp {

namespace {

// C^2 radial profile: 1 for r <= R/4, quintic ramp to 0 at r = R/2. First
// and second derivatives vanish at both ends.
double bump(double r, double Rs) {
  const double inner = 0.25 * Rs, outer = 0.5 * Rs;
  if (r <= inner) return 1.0;
  if (r >= outer) return 0.0;
  const double t = (r - inner) / (outer - inner);
  // Rounding can push the polynomial a hair past 1 near the outer edge.
  return std::max(0.0, 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t)));
}

struct BBox {
  int x0, y0, x1, y1;
};

BBox ball_bbox(const GridField& R, cplx s, double radius) {
  const double h = R.spacing;
  const int cx0 = static_cast<int>(std::floor((s.real() - radius - R.origin.real()) / h));
  const int cy0 = static_cast<int>(std::floor((s.imag() - radius - R.origin.imag()) / h));
  const int cx1 = static_cast<int>(std::ceil((s.real() + radius - R.origin.real()) / h));
  const int cy1 = static_cast<int>(std::ceil((s.imag() + radius - R.origin.imag()) / h));
  return {std::max(0, cx0), std::max(0, cy0), std::min(R.nx - 1, cx1),
          std::min(R.ny - 1, cy1)};
}

}  // namespace

BallCover build_cover(const GridField& R, const Rect& window) {
  BallCover cover;
  cover.window = window;
  for (int iy = 0; iy < R.ny; ++iy)
    for (int ix = 0; ix < R.nx; ++ix) {
      const cplx s = R.coord(ix, iy);
      if (!window.contains(s)) continue;
      bool blocked = false;
      for (std::size_t j = 0; j < cover.centers.size(); ++j) {
        const double dx = s.real() - cover.centers[j].real();
        const double dy = s.imag() - cover.centers[j].imag();
        const double q = 0.5 * cover.half_radius[j];
        if (dx * dx + dy * dy < q * q) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      const double Rs = R.at(ix, iy);
      if (!(Rs > 0.0))
        throw ConfigError("build_cover: R must be positive on the window");
      cover.centers.push_back(s);
      cover.half_radius.push_back(0.5 * Rs);
    }

  // Measured multiplicity of the full balls over window nodes.
  int mult = 0;
  for (int iy = 0; iy < R.ny; ++iy)
    for (int ix = 0; ix < R.nx; ++ix) {
      const cplx z = R.coord(ix, iy);
      if (!window.contains(z)) continue;
      int hits = 0;
      for (std::size_t j = 0; j < cover.centers.size(); ++j) {
        const double dx = z.real() - cover.centers[j].real();
        const double dy = z.imag() - cover.centers[j].imag();
        if (dx * dx + dy * dy < cover.half_radius[j] * cover.half_radius[j])
          ++hits;
      }
      mult = std::max(mult, hits);
    }
  cover.multiplicity = mult;
  return cover;
}

PartitionOfUnity build_partition(const BallCover& cover, const GridField& R) {
  PartitionOfUnity part;
  part.cover = cover;
  const double h = R.spacing;

  // Cropped bump fields first; g accumulates the stored values, so later
  // g >= g_s holds bitwise at every node and the quotient never exceeds 1.
  std::vector<BBox> boxes;
  boxes.reserve(cover.centers.size());
  part.functions.reserve(cover.centers.size());
  GridField g = R;
  std::fill(g.values.begin(), g.values.end(), 0.0);
  for (std::size_t j = 0; j < cover.centers.size(); ++j) {
    const cplx s = cover.centers[j];
    const double hr = cover.half_radius[j];
    // One-cell margin so centered differences reach the support edge.
    const BBox bb = ball_bbox(R, s, hr + 2.0 * h);
    GridField f;
    f.spacing = h;
    f.nx = bb.x1 - bb.x0 + 1;
    f.ny = bb.y1 - bb.y0 + 1;
    f.origin = R.coord(bb.x0, bb.y0);
    f.values.assign(static_cast<std::size_t>(f.nx) * f.ny, 0.0);
    for (int iy = 0; iy < f.ny; ++iy)
      for (int ix = 0; ix < f.nx; ++ix) {
        const double gs =
            bump(std::abs(R.coord(bb.x0 + ix, bb.y0 + iy) - s), 2.0 * hr);
        f.at(ix, iy) = gs;
        g.at(bb.x0 + ix, bb.y0 + iy) += gs;
      }
    boxes.push_back(bb);
    part.functions.push_back(std::move(f));
  }
  for (int iy = 0; iy < R.ny; ++iy)
    for (int ix = 0; ix < R.nx; ++ix)
      if (cover.window.contains(R.coord(ix, iy)) && g.at(ix, iy) < 0.99)
        throw Error("build_partition: covering defect, bump sum below 0.99");

  double grad_c = 0.0, hess_c = 0.0;
  double int_c = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cover.centers.size(); ++j) {
    const BBox& bb = boxes[j];
    GridField& f = part.functions[j];
    for (int iy = 0; iy < f.ny; ++iy)
      for (int ix = 0; ix < f.nx; ++ix)
        if (f.at(ix, iy) > 0.0)
          f.at(ix, iy) /= g.at(bb.x0 + ix, bb.y0 + iy);

    // Derivative constants are meaningful only where the covering holds, so
    // the scan stays inside the window; off-window fringes where a single
    // bump tail normalizes to ~1 end in a support cliff that would otherwise
    // dominate the measurement. Mass is taken over the whole support.
    const double Rs = 2.0 * cover.half_radius[j];
    double gmax = 0.0, hmax = 0.0, mass = 0.0;
    for (int iy = 1; iy + 1 < f.ny; ++iy)
      for (int ix = 1; ix + 1 < f.nx; ++ix) {
        mass += f.at(ix, iy);
        if (!cover.window.contains(f.coord(ix, iy))) continue;
        const double fx = (f.at(ix + 1, iy) - f.at(ix - 1, iy)) / (2 * h);
        const double fy = (f.at(ix, iy + 1) - f.at(ix, iy - 1)) / (2 * h);
        const double fxx =
            (f.at(ix + 1, iy) - 2 * f.at(ix, iy) + f.at(ix - 1, iy)) / (h * h);
        const double fyy =
            (f.at(ix, iy + 1) - 2 * f.at(ix, iy) + f.at(ix, iy - 1)) / (h * h);
        const double fxy = (f.at(ix + 1, iy + 1) - f.at(ix + 1, iy - 1) -
                            f.at(ix - 1, iy + 1) + f.at(ix - 1, iy - 1)) /
                           (4 * h * h);
        gmax = std::max(gmax, std::hypot(fx, fy));
        hmax = std::max(hmax, std::abs(fxx) + 2 * std::abs(fxy) + std::abs(fyy));
      }
    mass *= h * h;
    grad_c = std::max(grad_c, gmax * Rs);
    hess_c = std::max(hess_c, hmax * Rs * Rs);
    int_c = std::min(int_c, mass / (Rs * Rs));
  }
  part.grad_const = grad_c;
  part.hess_const = hess_c;
  part.integral_const = int_c;
  return part;
}

CutoffResult cutoff(const CellMask& U, const SpecialMetricView& view,
                    const PartitionOfUnity& part) {
  const GridField& R = view.R();
  CutoffResult out;
  out.f = R;
  std::fill(out.f.values.begin(), out.f.values.end(), 0.0);
  out.u_plus4 = CellMask::empty(R);
  if (U.count() == 0) return out;

  const std::vector<double> dist = view.multi_distance_field(U);
  for (int iy = 0; iy < R.ny; ++iy)
    for (int ix = 0; ix < R.nx; ++ix) {
      if (dist[static_cast<std::size_t>(iy) * R.nx + ix] > 4.0) continue;
      if (ix == 0 || iy == 0 || ix == R.nx - 1 || iy == R.ny - 1)
        throw ClippedError("cutoff: U_{+4} touches the window boundary");
      out.u_plus4.set(ix, iy);
    }

  // A ball joins the plateau when every grid node it contains lies in U_{+4}.
  const double h = R.spacing;
  for (std::size_t j = 0; j < part.cover.centers.size(); ++j) {
    const cplx s = part.cover.centers[j];
    const double hr = part.cover.half_radius[j];
    const BBox bb = ball_bbox(R, s, hr);
    bool inside = true;
    for (int iy = bb.y0; iy <= bb.y1 && inside; ++iy)
      for (int ix = bb.x0; ix <= bb.x1; ++ix) {
        if (std::abs(R.coord(ix, iy) - s) >= hr) continue;
        if (!out.u_plus4.test(ix, iy)) {
          inside = false;
          break;
        }
      }
    if (!inside) continue;
    const GridField& fs = part.functions[j];
    const int ox = static_cast<int>(
        std::lround((fs.origin.real() - R.origin.real()) / h));
    const int oy = static_cast<int>(
        std::lround((fs.origin.imag() - R.origin.imag()) / h));
    for (int iy = 0; iy < fs.ny; ++iy)
      for (int ix = 0; ix < fs.nx; ++ix)
        out.f.at(ox + ix, oy + iy) += fs.at(ix, iy);
  }

  double seminorm = 0.0, comparison = 0.0;
  for (int iy = 1; iy + 1 < R.ny; ++iy)
    for (int ix = 1; ix + 1 < R.nx; ++ix) {
      const GridField& f = out.f;
      const double fx = (f.at(ix + 1, iy) - f.at(ix - 1, iy)) / (2 * h);
      const double fy = (f.at(ix, iy + 1) - f.at(ix, iy - 1)) / (2 * h);
      const double fxx =
          (f.at(ix + 1, iy) - 2 * f.at(ix, iy) + f.at(ix - 1, iy)) / (h * h);
      const double fyy =
          (f.at(ix, iy + 1) - 2 * f.at(ix, iy) + f.at(ix, iy - 1)) / (h * h);
      const double fxy = (f.at(ix + 1, iy + 1) - f.at(ix + 1, iy - 1) -
                          f.at(ix - 1, iy + 1) + f.at(ix - 1, iy - 1)) /
                         (4 * h * h);
      const double Rv = R.at(ix, iy);
      seminorm += Rv * std::hypot(fx, fy) +
                  Rv * Rv * (std::abs(fxx) + 2 * std::abs(fxy) + std::abs(fyy));
      if (out.u_plus4.test(ix, iy) && !U.test(ix, iy)) comparison += f.at(ix, iy);
    }
  out.seminorm = seminorm * h * h;
  out.comparison = comparison * h * h;
  return out;
}

}  // namespace cazp
