#pragma once
// All roots of the truncated series inside a disk, with an independent
// argument-principle count as cross-check. Root finding is simultaneous
// (Aberth-Ehrlich); p and p' are evaluated through the exponent-tracked
// backward recurrence, never through monomial coefficients, which leave
// double range past degree ~310.

#include <vector>

#include "cazp/gef_core.hpp"

namespace cazp {

struct ZeroSet {
  std::vector<cplx> points;
  double residual_bound = 0.0;  // max |psi(p)| over points (measured)
  double disk_radius = 0.0;
};

// Roots in the closed disk |z| <= disk_radius, Newton-polished, pairwise
// distinct beyond 1e-6, count certified against the winding-number oracle.
// Throws ConfigError when disk_radius > sample.reliable_radius,
// BoundaryError when a root or the contour count sits too close to the disk
// boundary (caller should enlarge the disk), ConvergenceError when the
// simultaneous iteration stalls even after a perturbed restart.
ZeroSet find_zeros(const GefSample& sample, double disk_radius);

// find_zeros with the boundary-proximity retry the error contract asks of
// callers: on BoundaryError the disk is enlarged by `bump` and retried, up
// to `tries` times. The returned disk_radius records the disk actually used.
ZeroSet find_zeros_expanding(const GefSample& sample, double disk_radius,
                             double bump = 0.004, int tries = 8);

// Winding number of psi along |z| = disk_radius, 4096-node trapezoid rule.
// Throws BoundaryError when the result is farther than 0.01 from an integer
// (a zero sits too close to the contour for the quadrature to resolve).
int count_zeros_contour(const GefSample& sample, double disk_radius);

}  // namespace cazp
