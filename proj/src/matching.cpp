#include "cazp/matching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <sstream>
#include <string>

namespace cazp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrtPi = std::sqrt(M_PI);

// Worst-case length overshoot of an 8-connected staircase over the straight
// segment: sqrt(4 - 2 sqrt 2) = 1.08239..., rounded up.
constexpr double kKappa = 1.0824;

// Cell membership of an off-grid point by nearest-node rounding.
bool try_node(const GridField& g, cplx z, int* node) {
  const int ix = static_cast<int>(std::lround((z.real() - g.origin.real()) / g.spacing));
  const int iy = static_cast<int>(std::lround((z.imag() - g.origin.imag()) / g.spacing));
  if (ix < 0 || iy < 0 || ix >= g.nx || iy >= g.ny) return false;
  *node = iy * g.nx + ix;
  return true;
}

bool in_mask(const CellMask& mask, const GridField& g, cplx z) {
  int node = -1;
  if (!try_node(g, z, &node)) return false;
  return mask.bits[static_cast<std::size_t>(node)] != 0;
}

// Lattice sites whose cell lies in the mask, enumerated over the whole grid.
int count_lattice_in(const CellMask& mask, const GridField& g) {
  const double xmax = g.origin.real() + (g.nx - 1) * g.spacing;
  const double ymax = g.origin.imag() + (g.ny - 1) * g.spacing;
  const int k0 = static_cast<int>(std::floor(g.origin.real() / kSqrtPi)) - 1;
  const int k1 = static_cast<int>(std::ceil(xmax / kSqrtPi)) + 1;
  const int l0 = static_cast<int>(std::floor(g.origin.imag() / kSqrtPi)) - 1;
  const int l1 = static_cast<int>(std::ceil(ymax / kSqrtPi)) + 1;
  int n = 0;
  for (int l = l0; l <= l1; ++l)
    for (int k = k0; k <= k1; ++k)
      if (in_mask(mask, g, cplx{k * kSqrtPi, l * kSqrtPi})) ++n;
  return n;
}

int count_zeros_in(const CellMask& mask, const GridField& g,
                   const std::vector<cplx>& zeros) {
  int n = 0;
  for (const cplx& z : zeros)
    if (in_mask(mask, g, z)) ++n;
  return n;
}

// Threshold a distance field into a mask; edge contact at the outermost
// radius means the neighborhood is clipped by the grid.
CellMask mask_within(const std::vector<double>& dist, const GridField& g,
                     double r, const char* who, double* max_abs_coord) {
  CellMask out = {g.nx, g.ny,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(g.nx) * g.ny, 0)};
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      if (dist[static_cast<std::size_t>(iy) * g.nx + ix] > r) continue;
      if (ix == 0 || iy == 0 || ix == g.nx - 1 || iy == g.ny - 1)
        throw ClippedError(std::string(who) + ": neighborhood touches the grid edge");
      out.set(ix, iy);
      if (max_abs_coord)
        *max_abs_coord = std::max(*max_abs_coord, std::abs(g.coord(ix, iy)));
    }
  return out;
}

double edge_depth(const Rect& w, cplx z) {
  return std::min(std::min(z.real() - w.x0, w.x1 - z.real()),
                  std::min(z.imag() - w.y0, w.y1 - z.imag()));
}

// ---- maximum bipartite matching --------------------------------------------

struct MatchState {
  std::vector<int> ml;  // lattice -> zero slot, -1 exposed
  std::vector<int> mz;  // zero slot -> lattice, -1 exposed
};

bool hk_bfs(const std::vector<std::vector<int>>& adj, const MatchState& m,
            std::vector<int>& level) {
  std::queue<int> q;
  level.assign(m.ml.size(), -1);
  for (std::size_t i = 0; i < m.ml.size(); ++i)
    if (m.ml[i] < 0) {
      level[i] = 0;
      q.push(static_cast<int>(i));
    }
  bool found = false;
  while (!q.empty()) {
    const int i = q.front();
    q.pop();
    for (int j : adj[static_cast<std::size_t>(i)]) {
      const int w = m.mz[static_cast<std::size_t>(j)];
      if (w < 0)
        found = true;
      else if (level[static_cast<std::size_t>(w)] < 0) {
        level[static_cast<std::size_t>(w)] = level[static_cast<std::size_t>(i)] + 1;
        q.push(w);
      }
    }
  }
  return found;
}

bool hk_dfs(int i, const std::vector<std::vector<int>>& adj, MatchState& m,
            std::vector<int>& level) {
  for (int j : adj[static_cast<std::size_t>(i)]) {
    const int w = m.mz[static_cast<std::size_t>(j)];
    if (w < 0 || (level[static_cast<std::size_t>(w)] ==
                      level[static_cast<std::size_t>(i)] + 1 &&
                  hk_dfs(w, adj, m, level))) {
      m.ml[static_cast<std::size_t>(i)] = j;
      m.mz[static_cast<std::size_t>(j)] = i;
      return true;
    }
  }
  level[static_cast<std::size_t>(i)] = -1;
  return false;
}

MatchState hopcroft_karp(const std::vector<std::vector<int>>& adj, int nr) {
  MatchState m;
  m.ml.assign(adj.size(), -1);
  m.mz.assign(static_cast<std::size_t>(nr), -1);
  for (std::size_t i = 0; i < adj.size(); ++i)
    for (int j : adj[i])
      if (m.mz[static_cast<std::size_t>(j)] < 0) {
        m.ml[i] = j;
        m.mz[static_cast<std::size_t>(j)] = static_cast<int>(i);
        break;
      }
  std::vector<int> level;
  while (hk_bfs(adj, m, level))
    for (std::size_t i = 0; i < adj.size(); ++i)
      if (m.ml[i] < 0) hk_dfs(static_cast<int>(i), adj, m, level);
  return m;
}

// Alternating BFS from the exposed from-side vertex `v`. Reaching a matched
// non-interior from-vertex shifts the exposure onto it (cardinality kept);
// reaching an exposed to-vertex augments. Returns false only when every
// reachable from-vertex is interior, i.e. the reachable set is a Hall
// violator; the reachable counts are then written to the out-params.
bool shift_exposure(int v, const std::vector<std::vector<int>>& adj_from,
                    std::vector<int>& match_from, std::vector<int>& match_to,
                    const std::vector<char>& interior_from,
                    std::size_t* violator_from, std::size_t* violator_to) {
  const std::size_t nf = match_from.size(), nt = match_to.size();
  std::vector<char> seen_f(nf, 0), seen_t(nt, 0);
  std::vector<int> via_to(nf, -1);    // matched to-vertex by which we reached a from-vertex
  std::vector<int> via_from(nt, -1);  // from-vertex preceding a to-vertex
  const auto unwind = [&](int start_j) {
    // chain of reassignments ending at v
    int j = start_j;
    while (true) {
      const int prev = via_from[static_cast<std::size_t>(j)];
      const int oldj = (prev == v) ? -1 : via_to[static_cast<std::size_t>(prev)];
      match_from[static_cast<std::size_t>(prev)] = j;
      match_to[static_cast<std::size_t>(j)] = prev;
      if (prev == v) return;
      j = oldj;
    }
  };
  std::queue<int> q;
  q.push(v);
  seen_f[static_cast<std::size_t>(v)] = 1;
  while (!q.empty()) {
    const int i = q.front();
    q.pop();
    for (int j : adj_from[static_cast<std::size_t>(i)]) {
      if (seen_t[static_cast<std::size_t>(j)]) continue;
      seen_t[static_cast<std::size_t>(j)] = 1;
      via_from[static_cast<std::size_t>(j)] = i;
      const int w = match_to[static_cast<std::size_t>(j)];
      if (w < 0) {
        unwind(j);
        return true;
      }
      if (seen_f[static_cast<std::size_t>(w)]) continue;
      seen_f[static_cast<std::size_t>(w)] = 1;
      via_to[static_cast<std::size_t>(w)] = j;
      if (!interior_from[static_cast<std::size_t>(w)]) {
        match_from[static_cast<std::size_t>(w)] = -1;
        unwind(j);
        return true;
      }
      q.push(w);
    }
  }
  if (violator_from)
    *violator_from = static_cast<std::size_t>(
        std::count(seen_f.begin(), seen_f.end(), static_cast<char>(1)));
  if (violator_to)
    *violator_to = static_cast<std::size_t>(
        std::count(seen_t.begin(), seen_t.end(), static_cast<char>(1)));
  return false;
}

std::vector<std::vector<int>> transpose(const std::vector<std::vector<int>>& adj,
                                        int nr) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(nr));
  for (std::size_t i = 0; i < adj.size(); ++i)
    for (int j : adj[i]) out[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
  return out;
}

// Dense shortest-augmenting-path assignment with potentials; exact optimum.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost[static_cast<std::size_t>(i0) - 1]
                               [static_cast<std::size_t>(j) - 1] -
                           u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)] > 0)
      row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)]) - 1] = j - 1;
  return row_to_col;
}

}  // namespace

double default_buffer(const GridField& R) {
  const double rmax = *std::max_element(R.values.begin(), R.values.end());
  return std::max(0.5 * rmax, 3.0 * kSqrtPi);
}

LatticeWindow make_lattice(const Rect& window, double buffer) {
  if (!(window.x1 > window.x0) || !(window.y1 > window.y0))
    throw ConfigError("make_lattice: degenerate window");
  if (!(buffer >= 0.0)) throw ConfigError("make_lattice: negative buffer");
  const double eps = 1e-9;
  LatticeWindow out;
  out.window = window;
  out.buffer = buffer;
  const int k0 = static_cast<int>(std::ceil((window.x0 - eps) / kSqrtPi));
  const int k1 = static_cast<int>(std::floor((window.x1 + eps) / kSqrtPi));
  const int l0 = static_cast<int>(std::ceil((window.y0 - eps) / kSqrtPi));
  const int l1 = static_cast<int>(std::floor((window.y1 + eps) / kSqrtPi));
  for (int l = l0; l <= l1; ++l)
    for (int k = k0; k <= k1; ++k) {
      LatticePoint p;
      p.k = k;
      p.l = l;
      p.pos = cplx{k * kSqrtPi, l * kSqrtPi};
      p.interior = edge_depth(window, p.pos) >= buffer - eps;
      out.points.push_back(p);
    }
  return out;
}

LemmaReport verify_main_lemma(const ZeroSet& zeros, const SpecialMetricView& view,
                              const CellMask& U) {
  const GridField& R = view.R();
  if (U.nx != R.nx || U.ny != R.ny)
    throw ConfigError("verify_main_lemma: mask shape mismatch");
  LemmaReport rep;
  if (U.count() == 0) {
    rep.pass = rep.set_side = rep.neighborhood_side = true;
    return rep;
  }
  const std::vector<double> dist = view.multi_distance_field(U);
  double reach = 0.0;
  const CellMask p4 = mask_within(dist, R, 4.0, "verify_main_lemma", &reach);
  const MollifierKernel kernel = make_kernel(R.spacing, 1.0);
  if (zeros.disk_radius < reach + kernel.radius)
    throw ConfigError(
        "verify_main_lemma: zero set does not cover U_{+4} plus the kernel radius");
  const GridField lap = laplacian_u(zeros, kernel, R);
  double su = 0.0, sp4 = 0.0;
  std::size_t cu = 0, c4 = 0;
  for (int iy = 0; iy < R.ny; ++iy)
    for (int ix = 0; ix < R.nx; ++ix) {
      if (!p4.test(ix, iy)) continue;
      sp4 += lap.at(ix, iy);
      ++c4;
      if (U.test(ix, iy)) {
        su += lap.at(ix, iy);
        ++cu;
      }
    }
  const double h2 = R.spacing * R.spacing;
  rep.int_u = h2 * su;
  rep.int_plus4 = h2 * sp4;
  rep.bound = h2 * static_cast<double>(c4 - cu);
  rep.set_side = rep.int_u <= rep.bound + 1e-9;
  rep.neighborhood_side = -rep.int_plus4 <= rep.bound + 1e-9;
  rep.pass = rep.set_side && rep.neighborhood_side;
  rep.margin = std::min(rep.bound - rep.int_u, rep.bound + rep.int_plus4);
  return rep;
}

HallReport verify_hall(const ZeroSet& zeros, const SpecialMetricView& view,
                       const CellMask& U) {
  const GridField& R = view.R();
  if (U.nx != R.nx || U.ny != R.ny)
    throw ConfigError("verify_hall: mask shape mismatch");
  HallReport rep;
  if (U.count() == 0) {
    rep.pass = true;
    return rep;
  }
  const std::vector<double> dist = view.multi_distance_field(U);
  double reach = 0.0;
  const CellMask p5 = mask_within(dist, R, 5.0, "verify_hall", &reach);
  if (zeros.disk_radius < reach)
    throw ConfigError("verify_hall: zero set does not cover U_{+5}");
  const CellMask p4 = mask_within(dist, R, 4.0, "verify_hall", nullptr);
  const CellMask p1 = mask_within(dist, R, 1.0, "verify_hall", nullptr);
  rep.n_psi_u = count_zeros_in(U, R, zeros.points);
  rep.n_psi_p4 = count_zeros_in(p4, R, zeros.points);
  rep.n_psi_p5 = count_zeros_in(p5, R, zeros.points);
  rep.n_u = count_lattice_in(U, R);
  rep.n_p1 = count_lattice_in(p1, R);
  rep.n_p5 = count_lattice_in(p5, R);
  const double h2 = R.spacing * R.spacing;
  rep.m_u = h2 * static_cast<double>(U.count());
  rep.m_p1 = h2 * static_cast<double>(p1.count());
  rep.m_p4 = h2 * static_cast<double>(p4.count());
  const double checks[6] = {
      static_cast<double>(rep.n_p5 - rep.n_psi_u),
      static_cast<double>(rep.n_psi_p5 - rep.n_u),
      rep.m_p1 - M_PI * rep.n_u,
      M_PI * rep.n_p1 - rep.m_u,
      rep.m_p4 - M_PI * rep.n_psi_u,
      M_PI * rep.n_psi_p4 - rep.m_u,
  };
  rep.margin = *std::min_element(checks, checks + 6);
  rep.pass = rep.margin >= -1e-9;
  return rep;
}

Matching build_matching(const ZeroSet& zeros, const LatticeWindow& lattice,
                        const SpecialMetricView& view, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("build_matching: threshold must be positive");
  const GridField& R = view.R();
  const Rect& w = lattice.window;
  for (const cplx corner : {cplx{w.x0, w.y0}, cplx{w.x1, w.y0}, cplx{w.x0, w.y1},
                            cplx{w.x1, w.y1}})
    if (!R.contains(corner))
      throw ConfigError("build_matching: lattice window outside the metric grid");

  const int nl = static_cast<int>(lattice.points.size());
  std::vector<int> zidx;
  for (std::size_t j = 0; j < zeros.points.size(); ++j)
    if (w.contains(zeros.points[j])) zidx.push_back(static_cast<int>(j));
  const int nz = static_cast<int>(zidx.size());

  std::vector<int> lat_node(static_cast<std::size_t>(nl));
  std::vector<char> lat_interior(static_cast<std::size_t>(nl));
  for (int i = 0; i < nl; ++i) {
    lat_node[static_cast<std::size_t>(i)] = view.node_index(lattice.points[static_cast<std::size_t>(i)].pos);
    lat_interior[static_cast<std::size_t>(i)] = lattice.points[static_cast<std::size_t>(i)].interior ? 1 : 0;
  }
  std::vector<int> zero_node(static_cast<std::size_t>(nz));
  std::vector<char> zero_interior(static_cast<std::size_t>(nz));
  for (int jj = 0; jj < nz; ++jj) {
    const cplx z = zeros.points[static_cast<std::size_t>(zidx[static_cast<std::size_t>(jj)])];
    zero_node[static_cast<std::size_t>(jj)] = view.node_index(z);
    zero_interior[static_cast<std::size_t>(jj)] =
        edge_depth(w, z) >= lattice.buffer - 1e-9 ? 1 : 0;
  }

  const double cap = threshold * (1.0 + 1e-9);
  const double rmin = *std::min_element(R.values.begin(), R.values.end());
  // Euclidean radius below which a staircase path certifies rho <= threshold
  const double cert = threshold * rmin / kKappa - R.spacing * M_SQRT2;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(nl));
  if (cert > 0.0)
    for (int i = 0; i < nl; ++i) {
      const cplx pos = lattice.points[static_cast<std::size_t>(i)].pos;
      for (int jj = 0; jj < nz; ++jj)
        if (std::abs(zeros.points[static_cast<std::size_t>(zidx[static_cast<std::size_t>(jj)])] - pos) <= cert)
          adj[static_cast<std::size_t>(i)].push_back(jj);
    }

  const auto saturate = [&](const std::vector<std::vector<int>>& a, MatchState& m,
                            int* bad_lattice, int* bad_zero, std::size_t* vf,
                            std::size_t* vt) {
    const std::vector<std::vector<int>> at = transpose(a, nz);
    for (int i = 0; i < nl; ++i)
      if (m.ml[static_cast<std::size_t>(i)] < 0 && lat_interior[static_cast<std::size_t>(i)])
        if (!shift_exposure(i, a, m.ml, m.mz, lat_interior, vf, vt)) {
          *bad_lattice = i;
          return false;
        }
    for (int jj = 0; jj < nz; ++jj)
      if (m.mz[static_cast<std::size_t>(jj)] < 0 && zero_interior[static_cast<std::size_t>(jj)])
        if (!shift_exposure(jj, at, m.mz, m.ml, zero_interior, vf, vt)) {
          *bad_zero = jj;
          return false;
        }
    return true;
  };

  MatchState m = hopcroft_karp(adj, nz);
  int bad_lattice = -1, bad_zero = -1;
  std::size_t vf = 0, vt = 0;
  if (!saturate(adj, m, &bad_lattice, &bad_zero, &vf, &vt)) {
    // certified subgraph insufficient; build the exact admissibility graph
    for (int i = 0; i < nl; ++i) {
      adj[static_cast<std::size_t>(i)].clear();
      const std::vector<double> d =
          view.capped_distance_field(lat_node[static_cast<std::size_t>(i)], cap);
      for (int jj = 0; jj < nz; ++jj)
        if (d[static_cast<std::size_t>(zero_node[static_cast<std::size_t>(jj)])] <= cap)
          adj[static_cast<std::size_t>(i)].push_back(jj);
    }
    m = hopcroft_karp(adj, nz);
    bad_lattice = bad_zero = -1;
    if (!saturate(adj, m, &bad_lattice, &bad_zero, &vf, &vt)) {
      std::ostringstream msg;
      msg << "build_matching: imperfect matching; ";
      if (bad_lattice >= 0) {
        const LatticePoint& p = lattice.points[static_cast<std::size_t>(bad_lattice)];
        msg << "interior lattice point (k=" << p.k << ", l=" << p.l << ") at ("
            << p.pos.real() << ", " << p.pos.imag() << ")";
      } else {
        const cplx z = zeros.points[static_cast<std::size_t>(zidx[static_cast<std::size_t>(bad_zero)])];
        msg << "interior zero at (" << z.real() << ", " << z.imag() << ")";
      }
      msg << " unmatched; Hall violator has " << vf << " side vertices vs " << vt
          << " reachable partners at threshold " << threshold;
      throw Error(msg.str());
    }
  }

  // Quadratic-displacement 2-opt over certified swaps. The matched vertex
  // sets are untouched (still a maximum matching, every edge still
  // certified), but each site is pulled toward a near zero instead of
  // whatever the augmenting order produced.
  if (cert > 0.0) {
    std::vector<int> rows;
    for (int i = 0; i < nl; ++i)
      if (m.ml[static_cast<std::size_t>(i)] >= 0) rows.push_back(i);
    const auto zero_of = [&](int i) -> cplx {
      return zeros.points[static_cast<std::size_t>(
          zidx[static_cast<std::size_t>(m.ml[static_cast<std::size_t>(i)])])];
    };
    bool improved = true;
    for (int pass = 0; pass < 32 && improved; ++pass) {
      improved = false;
      for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = a + 1; b < rows.size(); ++b) {
          const int ia = rows[a], ib = rows[b];
          const cplx pa = lattice.points[static_cast<std::size_t>(ia)].pos;
          const cplx pb = lattice.points[static_cast<std::size_t>(ib)].pos;
          const cplx za = zero_of(ia), zb = zero_of(ib);
          const double cur = std::norm(za - pa) + std::norm(zb - pb);
          const double alt = std::norm(zb - pa) + std::norm(za - pb);
          if (alt < cur - 1e-12 && std::abs(zb - pa) <= cert &&
              std::abs(za - pb) <= cert) {
            std::swap(m.ml[static_cast<std::size_t>(ia)],
                      m.ml[static_cast<std::size_t>(ib)]);
            m.mz[static_cast<std::size_t>(m.ml[static_cast<std::size_t>(ia)])] = ia;
            m.mz[static_cast<std::size_t>(m.ml[static_cast<std::size_t>(ib)])] = ib;
            improved = true;
          }
        }
    }
  }

  Matching out;
  std::vector<char> zero_matched(static_cast<std::size_t>(zeros.points.size()), 0);
  for (int i = 0; i < nl; ++i) {
    const int jj = m.ml[static_cast<std::size_t>(i)];
    if (jj < 0) {
      out.unmatched_lattice.push_back(i);
      continue;
    }
    const int j = zidx[static_cast<std::size_t>(jj)];
    zero_matched[static_cast<std::size_t>(j)] = 1;
    const LatticePoint& p = lattice.points[static_cast<std::size_t>(i)];
    MatchedPair pair;
    pair.k = p.k;
    pair.l = p.l;
    pair.zero_index = j;
    pair.xi = zeros.points[static_cast<std::size_t>(j)] - p.pos;
    pair.rho_cost = view.bounded_distance(lat_node[static_cast<std::size_t>(i)],
                                          zero_node[static_cast<std::size_t>(jj)],
                                          cap * (1.0 + 1e-9));
    pair.interior = p.interior && zero_interior[static_cast<std::size_t>(jj)] != 0;
    out.pairs.push_back(pair);
  }
  for (std::size_t j = 0; j < zeros.points.size(); ++j)
    if (!zero_matched[j]) out.unmatched_zeros.push_back(static_cast<int>(j));
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const MatchedPair& a, const MatchedPair& b) {
              return a.l != b.l ? a.l < b.l : a.k < b.k;
            });
  return out;
}

Matching min_cost_matching(const ZeroSet& zeros, const LatticeWindow& lattice,
                           const SpecialMetricView& view, double threshold) {
  if (!(threshold > 0.0))
    throw ConfigError("min_cost_matching: threshold must be positive");
  const Rect& w = lattice.window;
  std::vector<int> li, lpool;  // instance rows / boundary pool
  for (std::size_t i = 0; i < lattice.points.size(); ++i)
    (lattice.points[i].interior ? li : lpool).push_back(static_cast<int>(i));
  std::vector<int> zi, zpool;
  for (std::size_t j = 0; j < zeros.points.size(); ++j) {
    if (!w.contains(zeros.points[j])) continue;
    const bool interior = edge_depth(w, zeros.points[j]) >= lattice.buffer - 1e-9;
    (interior ? zi : zpool).push_back(static_cast<int>(j));
  }
  const auto by_depth_desc = [&](std::vector<int>& pool, auto&& pos_of) {
    std::sort(pool.begin(), pool.end(), [&](int a, int b) {
      return edge_depth(w, pos_of(a)) > edge_depth(w, pos_of(b));
    });
  };
  by_depth_desc(lpool, [&](int i) { return lattice.points[static_cast<std::size_t>(i)].pos; });
  by_depth_desc(zpool, [&](int j) { return zeros.points[static_cast<std::size_t>(j)]; });
  while (li.size() < zi.size() && !lpool.empty()) {
    li.push_back(lpool.front());
    lpool.erase(lpool.begin());
  }
  while (zi.size() < li.size() && !zpool.empty()) {
    zi.push_back(zpool.front());
    zpool.erase(zpool.begin());
  }
  if (li.size() != zi.size())
    throw ConfigError("min_cost_matching: cannot level interior counts from the boundary pool");

  Matching out;
  const int n = static_cast<int>(li.size());
  std::vector<char> lat_used(lattice.points.size(), 0);
  std::vector<char> zero_used(zeros.points.size(), 0);
  if (n > 0) {
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n)));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        cost[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = std::norm(
            zeros.points[static_cast<std::size_t>(zi[static_cast<std::size_t>(b)])] -
            lattice.points[static_cast<std::size_t>(li[static_cast<std::size_t>(a)])].pos);
    const std::vector<int> row_to_col = solve_assignment(cost);
    for (int a = 0; a < n; ++a) {
      const LatticePoint& p = lattice.points[static_cast<std::size_t>(li[static_cast<std::size_t>(a)])];
      const int j = zi[static_cast<std::size_t>(row_to_col[static_cast<std::size_t>(a)])];
      const cplx z = zeros.points[static_cast<std::size_t>(j)];
      lat_used[static_cast<std::size_t>(li[static_cast<std::size_t>(a)])] = 1;
      zero_used[static_cast<std::size_t>(j)] = 1;
      MatchedPair pair;
      pair.k = p.k;
      pair.l = p.l;
      pair.zero_index = j;
      pair.xi = z - p.pos;
      pair.rho_cost = view.bounded_distance(view.node_index(p.pos),
                                            view.node_index(z), 4.0 * threshold);
      pair.interior = p.interior && edge_depth(w, z) >= lattice.buffer - 1e-9;
      out.pairs.push_back(pair);
    }
  }
  for (std::size_t i = 0; i < lattice.points.size(); ++i)
    if (!lat_used[i]) out.unmatched_lattice.push_back(static_cast<int>(i));
  for (std::size_t j = 0; j < zeros.points.size(); ++j)
    if (!zero_used[j]) out.unmatched_zeros.push_back(static_cast<int>(j));
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const MatchedPair& a, const MatchedPair& b) {
              return a.l != b.l ? a.l < b.l : a.k < b.k;
            });
  return out;
}

std::vector<DisplacementRow> displacement_rows(const Matching& m, int trial,
                                               const std::string& matcher) {
  std::vector<DisplacementRow> rows;
  for (const MatchedPair& p : m.pairs) {
    if (!p.interior) continue;
    DisplacementRow r;
    r.trial = trial;
    r.k = p.k;
    r.l = p.l;
    r.xi_re = p.xi.real();
    r.xi_im = p.xi.imag();
    r.abs_xi = std::abs(p.xi);
    r.rho_cost = p.rho_cost;
    r.matcher = matcher;
    rows.push_back(r);
  }
  return rows;
}

void write_displacements_csv(const std::vector<DisplacementRow>& rows,
                             const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("write_displacements_csv: cannot open " + path);
  std::fprintf(f, "trial,k,l,xi_re,xi_im,abs_xi,rho_cost,matcher\n");
  for (const DisplacementRow& r : rows)
    std::fprintf(f, "%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%s\n", r.trial, r.k, r.l,
                 r.xi_re, r.xi_im, r.abs_xi, r.rho_cost, r.matcher.c_str());
  std::fclose(f);
}

std::vector<DisplacementRow> read_displacements_csv(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) throw ConfigError("read_displacements_csv: cannot open " + path);
  std::vector<DisplacementRow> rows;
  char line[512];
  bool header = true;
  while (std::fgets(line, sizeof line, f)) {
    if (header) {
      header = false;
      continue;
    }
    DisplacementRow r;
    char matcher[64] = {0};
    if (std::sscanf(line, "%d,%d,%d,%lf,%lf,%lf,%lf,%63[^\n]", &r.trial, &r.k,
                    &r.l, &r.xi_re, &r.xi_im, &r.abs_xi, &r.rho_cost,
                    matcher) == 8) {
      r.matcher = matcher;
      rows.push_back(r);
    }
  }
  std::fclose(f);
  return rows;
}

}  // namespace cazp
