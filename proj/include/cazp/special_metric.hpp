#pragma once
// Path metric rho(x,y) = inf over curves of integral |dz|/R, realized as
// shortest paths on the 8-connected grid graph with edge weight
// (step length) * 2/(R(a)+R(b)). The discrete distance overestimates the
// continuum metric by at most the 8-connectivity factor ~1.0824 plus O(h).

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "cazp/potential_field.hpp"

namespace cazp {

class SpecialMetricView {
 public:
  explicit SpecialMetricView(GridField R_field);

  const GridField& R() const { return R_; }
  int nodes() const { return R_.nx * R_.ny; }

  // Full single-source distance field from a node, memoized per source.
  std::shared_ptr<const std::vector<double>> distance_field(int source) const;

  // Multi-source distance field (0 on every set cell). Not memoized.
  std::vector<double> multi_distance_field(const CellMask& sources) const;

  // Early-exit single-source distance: stops when `target` settles or all
  // remaining nodes exceed `cap`. Returns +inf when cap is hit first.
  double bounded_distance(int source, int target, double cap) const;

  // Single-source field truncated at `cap`: entries <= cap are exact
  // (settled), larger entries are tentative upper bounds or +inf. Not
  // memoized.
  std::vector<double> capped_distance_field(int source, double cap) const;

  int node_index(cplx z) const;      // nearest node; ConfigError outside window
  cplx node_coord(int index) const;

 private:
  GridField R_;
  struct Memo {
    std::mutex mu;
    std::map<int, std::shared_ptr<const std::vector<double>>> fields;
  };
  std::shared_ptr<Memo> memo_;
};

struct Chain {
  std::vector<cplx> points;  // x_0 .. x_N, last point is the path endpoint
  int index = 0;             // N
};

// Shortest-path distance between two points (snapped to nearest nodes).
double distance(const SpecialMetricView& view, cplx x, cplx y);

// Node polyline of one shortest path from x to y.
std::vector<cplx> shortest_path(const SpecialMetricView& view, cplx x, cplx y);

// All cells within metric distance r of the cell set U. Contains U; monotone
// in r and in U. Throws ClippedError when the result reaches the window edge
// (the true neighborhood would extend beyond the grid).
CellMask neighborhood(const SpecialMetricView& view, const CellMask& U, double r);

// Chain along a polyline by the first-exit rule: x_{j+1} is the first point
// of the path at Euclidean distance R(x_j)/2 from x_j, or the endpoint.
// R is read from the view by bilinear interpolation.
Chain chain_index(const SpecialMetricView& view, const std::vector<cplx>& path);

// rho-length of a polyline: integral of |dz|/R along it, midpoint rule with
// segments subdivided to half the grid spacing.
double rho_length(const SpecialMetricView& view, const std::vector<cplx>& path);

}  // namespace cazp
