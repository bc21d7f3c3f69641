#pragma once
// Variable-scale ball covers, subordinate partitions of unity, and the
// plateau cutoff built from them. Ball radii follow the field R: full balls
// B(s) = B(s, R(s)/2), half-balls have radius R(s)/4. Half-balls cover the
// window; the partition bumps are radial C^2 profiles normalized by their
// pointwise sum.

#include <vector>

#include "cazp/special_metric.hpp"

namespace cazp {

struct Rect {
  double x0, y0, x1, y1;
  bool contains(cplx z) const {
    return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1;
  }
};

struct BallCover {
  std::vector<cplx> centers;
  std::vector<double> half_radius;  // R(s)/2 per center
  int multiplicity = 0;             // measured max overlap count of full balls
  Rect window{0, 0, 0, 0};
};

// Greedy maximal packing over grid nodes in row-major order. A node s is
// accepted when no prior center s' has |s - s'| < R(s')/4; every rejected
// node then lies in some accepted half-ball, so the cover invariant is exact
// on the grid.
BallCover build_cover(const GridField& R, const Rect& window);

struct PartitionOfUnity {
  BallCover cover;
  std::vector<GridField> functions;  // f_s cropped to the ball bounding box
  double grad_const = 0.0;      // max over s of max|grad f_s| * R(s)
  double hess_const = 0.0;      // max over s of max|hess f_s| * R(s)^2
  double integral_const = 0.0;  // min over s of (integral f_s) / R(s)^2
};

// Radial bumps (1 on the half-ball, 0 off the full ball, C^2 quintic ramp
// between) normalized by their sum. Throws Error when the unnormalized sum
// drops below 0.99 inside the window (covering defect).
PartitionOfUnity build_partition(const BallCover& cover, const GridField& R);

struct CutoffResult {
  GridField f;
  double seminorm = 0.0;    // integral of R |grad f| + R^2 |hess f|
  double comparison = 0.0;  // integral of f over U_{+4} minus U
  CellMask u_plus4;
};

// f = sum of the partition functions of every ball contained in U_{+4}
// (metric neighborhood radius 4). Equals 1 on U, vanishes off U_{+4}.
// Empty U gives the zero field. Throws ClippedError when U_{+4} touches the
// window boundary.
CutoffResult cutoff(const CellMask& U, const SpecialMetricView& view,
                    const PartitionOfUnity& part);

}  // namespace cazp
