#pragma once
// Square-grid scalar fields and the operations built on them: the compactly
// supported radial mollifier, discrete convolution with cell-area weighting,
// the Lip(1) envelope field R, the exact Laplacian of the smoothed potential
// (a sum of kernel stamps minus one, no numerical differentiation), and
// smoothed set indicators. Cell area h^2 is the measure everywhere.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "cazp/gef_core.hpp"
#include "cazp/zero_finder.hpp"

namespace cazp {

struct GridField {
  cplx origin{0.0, 0.0};  // coordinate of node (0,0)
  double spacing = 0.1;
  int nx = 0;
  int ny = 0;
  std::vector<double> values;  // row-major, index iy*nx+ix

  double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * nx + ix]; }
  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
  cplx coord(int ix, int iy) const {
    return origin + cplx{ix * spacing, iy * spacing};
  }
  bool contains(cplx z, double margin = 0.0) const;
  // Bilinear interpolation; z must lie inside the node rectangle.
  double value_at(cplx z) const;
};

// Grid of empty values covering center +/- halfwidth in both axes.
GridField make_grid(cplx center, double halfwidth, double spacing);

// Subset of a grid's cells, same shape as its partner field.
struct CellMask {
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> bits;

  static CellMask empty(const GridField& g) {
    return {g.nx, g.ny, std::vector<std::uint8_t>(
                            static_cast<std::size_t>(g.nx) * g.ny, 0)};
  }
  bool test(int ix, int iy) const {
    return bits[static_cast<std::size_t>(iy) * nx + ix] != 0;
  }
  void set(int ix, int iy, bool v = true) {
    bits[static_cast<std::size_t>(iy) * nx + ix] = v ? 1 : 0;
  }
  std::size_t count() const;
};

struct MollifierKernel {
  double radius = 1.0;
  double spacing = 0.1;
  int half_cells = 10;         // stamp extends +/- half_cells nodes
  double norm = 1.0;           // profile multiplier making sum(stamp) h^2 = 1
  std::vector<double> stamp;   // (2*half_cells+1)^2 normalized samples

  double stamp_at(int dx, int dy) const {
    return stamp[static_cast<std::size_t>(dy + half_cells) * (2 * half_cells + 1) +
                 (dx + half_cells)];
  }
  // Continuous profile with the same normalization as the grid stamp.
  double value_at(cplx offset) const;
};

// Radial C-infinity bump exp(-1/(1-(r/radius)^2)) inside r < radius, zero
// outside, normalized so the discrete cell-area sum is exactly 1.
MollifierKernel make_kernel(double spacing, double radius = 1.0);

// Potential phi = (1/2)log|psi| - |z|^2/4 sampled at grid nodes. Far nodes
// are evaluated with a per-annulus degree cap (tail below sample tolerance).
GridField potential_grid(const GefSample& sample, cplx center, double halfwidth,
                         double spacing);

struct PatchedField {
  GridField field;
  int patched = 0;  // -inf nodes replaced by the 3x3 finite-neighbor minimum
};

// -inf sentinels replaced by the 3x3 finite-neighbor minimum; the count is
// reported so trials can record how often a grid node collided with a zero.
// Required before any convolution (-inf times a zero stamp weight is NaN).
PatchedField patch_minus_inf(const GridField& field);

// |field| after patching.
PatchedField absolute_patched(const GridField& field);

// Discrete convolution with cell-area weighting. The output grid is the
// input eroded by the kernel half-width (only nodes whose full stamp lies
// inside the input are kept). Throws ConfigError when nothing remains.
GridField convolve(const GridField& field, const MollifierKernel& kernel);

// Upper envelope R(z) = max_w ( sqrt(const_c (1 + field(w))) - |w - z| ) over
// the grid nodes w. Exact (early-terminated) scan, so the result is Lip(1)
// on node pairs and >= sqrt(const_c) everywhere.
GridField compute_R(const GridField& abs_phi_smoothed, double const_c);

// pi * sum_zeros kernel(. - zero) - 1 on the shape grid. Exact identity for
// the Laplacian of the smoothed potential; no finite differences involved.
// Zeros must be complete within the grid window plus the kernel radius.
GridField laplacian_u(const ZeroSet& zeros, const MollifierKernel& kernel,
                      const GridField& shape);

// Smoothed indicator of the cell set U (grid geometry taken from `geom`).
GridField indicator_smoothed(const CellMask& U, const GridField& geom,
                             const MollifierKernel& kernel);

// Cell-area integrals.
double integrate(const GridField& field);
double integrate(const GridField& field, const CellMask& over);

// ---- export ----------------------------------------------------------------
// CSV rows "x,y,value"; raster layout: 3 doubles (origin re, origin im,
// spacing), 2 int64 (nx, ny), then row-major 64-bit float values.
void write_csv(const GridField& field, const std::string& path);
void write_raster(const GridField& field, const std::string& path);
GridField read_raster(const std::string& path);

}  // namespace cazp
