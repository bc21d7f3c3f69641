#pragma once
// Zero-to-lattice transport: area/count comparison reports for a cell set
// against its metric neighborhoods, bounded-distance bipartite matching
// between the zeros and the sqrt(pi)-spaced lattice, a min-cost comparison
// matcher, and the displacement table they feed.

#include <string>
#include <vector>

#include "cazp/potential_field.hpp"
#include "cazp/special_metric.hpp"
#include "cazp/whitney.hpp"
#include "cazp/zero_finder.hpp"

namespace cazp {

// One site of sqrt(pi) * Z^2 restricted to a window. Cell area is pi, the
// mean zero count per cell, so counts against areas compare one-to-one.
struct LatticePoint {
  int k = 0;
  int l = 0;
  cplx pos{0.0, 0.0};     // sqrt(pi) * (k + i l)
  bool interior = false;  // at least `buffer` from every window edge
};

struct LatticeWindow {
  std::vector<LatticePoint> points;  // sorted by (l, k)
  Rect window{0.0, 0.0, 0.0, 0.0};
  double buffer = 0.0;
};

// Edge margin separating reported statistics from window-truncation effects:
// half the largest R on the grid, never below three lattice spacings.
double default_buffer(const GridField& R);

// All lattice sites inside `window` (edge-inclusive with a 1e-9 snap
// tolerance), flagged interior at distance >= buffer from every edge.
LatticeWindow make_lattice(const Rect& window, double buffer);

// Both one-sided bounds tying the mass shift over a cell set U to the area
// of the metric collar U_{+4} \ U. `set_side` is
// integral_U lap dm <= m(U_{+4} \ U), `neighborhood_side` is
// -integral_{U_{+4}} lap dm <= m(U_{+4} \ U); `pass` requires both. The
// first holds whenever U sits in a region of surplus area; the second needs
// the zero set to refill U_{+4} at unit intensity, so it fails by
// construction far from all zeros.
struct LemmaReport {
  bool pass = false;
  bool set_side = false;
  bool neighborhood_side = false;
  double int_u = 0.0;      // integral of lap over U
  double int_plus4 = 0.0;  // integral of lap over U_{+4}
  double bound = 0.0;      // m(U_{+4} \ U)
  double margin = 0.0;     // min slack across both bounds
};

// Exact-identity check: lap = pi * (kernel stamps at zeros) - 1 on the grid
// of `view`, integrated over U and U_{+4} with cell-area weighting. Empty U
// passes trivially. Throws ClippedError when U_{+4} reaches the grid edge
// and ConfigError when the zero set cannot cover U_{+4} plus the kernel
// radius (zeros.disk_radius too small).
LemmaReport verify_main_lemma(const ZeroSet& zeros, const SpecialMetricView& view,
                              const CellMask& U);

// Six count/area comparisons between zeros (n_psi), lattice sites (n place
// pi mass each) and Lebesgue area m, across the metric neighborhoods of U:
//   n_psi(U) <= n(U_{+5})        n(U) <= n_psi(U_{+5})
//   pi n(U)  <= m(U_{+1})        m(U) <= pi n(U_{+1})
//   pi n_psi(U) <= m(U_{+4})     m(U) <= pi n_psi(U_{+4})
// Lattice sites are enumerated over the whole grid, not a caller window.
struct HallReport {
  bool pass = false;
  int n_psi_u = 0;   // zeros in U
  int n_psi_p4 = 0;  // zeros in U_{+4}
  int n_psi_p5 = 0;  // zeros in U_{+5}
  int n_u = 0;       // lattice sites in U
  int n_p1 = 0;      // lattice sites in U_{+1}
  int n_p5 = 0;      // lattice sites in U_{+5}
  double m_u = 0.0;
  double m_p1 = 0.0;
  double m_p4 = 0.0;
  double margin = 0.0;  // min slack across the six comparisons
};

// Empty U passes trivially. Throws ClippedError when U_{+5} reaches the grid
// edge and ConfigError when the zero set cannot cover U_{+5}.
HallReport verify_hall(const ZeroSet& zeros, const SpecialMetricView& view,
                       const CellMask& U);

struct MatchedPair {
  int k = 0;
  int l = 0;
  int zero_index = -1;     // index into zeros.points
  cplx xi{0.0, 0.0};       // zero - lattice position
  double rho_cost = 0.0;   // grid metric distance between the snapped nodes
  bool interior = false;   // both endpoints clear the window buffer
};

struct Matching {
  std::vector<MatchedPair> pairs;        // sorted by (l, k)
  std::vector<int> unmatched_lattice;    // indices into lattice.points
  std::vector<int> unmatched_zeros;      // indices into zeros.points
};

// Maximum bipartite matching on the admissibility graph {metric distance <=
// threshold} between lattice sites and the zeros inside the window, with
// exposure shifted onto boundary points whenever an alternating path allows
// it. Admissible edges are first certified by the Euclidean bound
// kappa * (|pos - zero| + h sqrt 2) / min R <= threshold (a subset of the
// true graph); only if an interior point stays exposed is the exact graph
// built from capped per-source distance fields. Throws Error("imperfect
// matching ...") with the Hall violator sizes when an interior lattice point
// or interior zero stays exposed even on the exact graph.
Matching build_matching(const ZeroSet& zeros, const LatticeWindow& lattice,
                        const SpecialMetricView& view, double threshold = 5.0);

// Assignment minimizing the total squared displacement over the interior
// lattice sites and interior zeros; the smaller side is padded with its
// deepest boundary points until the counts agree. No admissibility cap;
// rho_cost is reported up to 4x threshold (+inf beyond). Throws ConfigError
// when the boundary pool cannot level the counts.
Matching min_cost_matching(const ZeroSet& zeros, const LatticeWindow& lattice,
                           const SpecialMetricView& view, double threshold = 5.0);

struct DisplacementRow {
  int trial = 0;
  int k = 0;
  int l = 0;
  double xi_re = 0.0;
  double xi_im = 0.0;
  double abs_xi = 0.0;
  double rho_cost = 0.0;
  std::string matcher;  // "hall" or "mincost"
};

// Interior pairs only; boundary-flagged pairs never enter statistics.
std::vector<DisplacementRow> displacement_rows(const Matching& m, int trial,
                                               const std::string& matcher);

// Header: trial,k,l,xi_re,xi_im,abs_xi,rho_cost,matcher
void write_displacements_csv(const std::vector<DisplacementRow>& rows,
                             const std::string& path);
std::vector<DisplacementRow> read_displacements_csv(const std::string& path);

}  // namespace cazp
