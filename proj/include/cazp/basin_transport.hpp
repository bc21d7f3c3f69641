#pragma once
// Area transport along -grad phi: every grid cell flows downhill until it
// reaches a zero's capture disk, leaves the reliable disk, or exhausts its
// step budget. Basins carry area (one expects pi per zero), diameter, and a
// window-truncation flag.

#include <string>
#include <vector>

#include "cazp/gef_core.hpp"
#include "cazp/potential_field.hpp"
#include "cazp/zero_finder.hpp"

namespace cazp {

constexpr int kEscaped = -1;
constexpr int kUnresolved = -2;

struct FlowResult {
  int label = kUnresolved;  // zero index, kEscaped, or kUnresolved
  int steps = 0;            // accepted integrator steps
  cplx end{0.0, 0.0};
  double max_rise = 0.0;    // worst per-step increase of phi (descent defect)
};

// Embedded 4th/5th-order descent of dz/dt = -grad phi with per-step error
// tolerance 1e-8, displacement clamp 0.1, capture radius 1e-3 confirmed by a
// Newton snap onto a catalogued zero, escape at |z| > reliable_radius, and a
// 1e-6 perturbation retried three times at gradient stalls. Every outcome is
// a label; the function does not throw on dynamics.
FlowResult flow_to_zero(const GefSample& sample, cplx start, const ZeroSet& zeros,
                        int max_steps = 100000);

struct BasinStats {
  cplx zero{0.0, 0.0};
  int cells = 0;
  double area = 0.0;      // spacing^2 * cells
  double diameter = 0.0;  // max pairwise distance over boundary cells
  bool boundary = false;  // some cell of the basin lies on the grid edge
};

struct BasinMap {
  cplx origin{0.0, 0.0};
  double spacing = 0.0;
  int nx = 0;
  int ny = 0;
  std::vector<int> labels;         // per cell: zero index, kEscaped, kUnresolved
  std::vector<BasinStats> basins;  // aligned with zeros.points
  int escaped_cells = 0;
  int unresolved_cells = 0;
  double escaped_area = 0.0;
  double unresolved_area = 0.0;
  double max_phi_rise = 0.0;
};

// Labels every cell center of `grid` via flow_to_zero. Cell counts partition
// the window exactly. Throws ConfigError when the grid leaves the sample's
// reliable disk or the zero catalogue cannot cover the window plus a travel
// margin of 2.
BasinMap basin_partition(const GefSample& sample, const ZeroSet& zeros,
                         const GridField& grid, int max_steps = 100000);

// Labels as a double-valued field sharing the grid geometry, so the raster
// writer doubles as the label dump.
GridField label_field(const BasinMap& map);

struct BasinRow {
  int trial = 0;
  double zero_re = 0.0;
  double zero_im = 0.0;
  double area = 0.0;
  double diameter = 0.0;
  int boundary_flag = 0;
};

// One row per basin that owns at least one cell.
std::vector<BasinRow> basin_rows(const BasinMap& map, int trial);

// Header: trial,zero_re,zero_im,area,diameter,boundary_flag
void write_basins_csv(const std::vector<BasinRow>& rows, const std::string& path);
std::vector<BasinRow> read_basins_csv(const std::string& path);

}  // namespace cazp
