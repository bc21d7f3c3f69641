#include "cazp/special_metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace cazp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct HeapEntry {
  double dist;
  int node;
  bool operator>(const HeapEntry& o) const { return dist > o.dist; }
};

using MinHeap =
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>>;

// 8-neighborhood; step length in units of the spacing.
constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
const double kLen[8] = {1, 1, 1, 1, M_SQRT2, M_SQRT2, M_SQRT2, M_SQRT2};

// Dijkstra core. Runs until the heap drains, `stop_node` settles, or the
// next key exceeds `cap`. `pred` is optional.
void sweep(const GridField& R, MinHeap& heap, std::vector<double>& dist,
           std::vector<int>* pred, int stop_node, double cap) {
  const int nx = R.nx, ny = R.ny;
  const double h = R.spacing;
  std::vector<char> done(dist.size(), 0);
  while (!heap.empty()) {
    const HeapEntry top = heap.top();
    heap.pop();
    if (done[static_cast<std::size_t>(top.node)]) continue;
    done[static_cast<std::size_t>(top.node)] = 1;
    if (top.node == stop_node) return;
    if (top.dist > cap) return;
    const int ix = top.node % nx;
    const int iy = top.node / nx;
    const double Ra = R.at(ix, iy);
    for (int k = 0; k < 8; ++k) {
      const int jx = ix + kDx[k], jy = iy + kDy[k];
      if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) continue;
      const int j = jy * nx + jx;
      if (done[static_cast<std::size_t>(j)]) continue;
      const double w = kLen[k] * h * 2.0 / (Ra + R.at(jx, jy));
      const double nd = top.dist + w;
      if (nd < dist[static_cast<std::size_t>(j)]) {
        dist[static_cast<std::size_t>(j)] = nd;
        if (pred) (*pred)[static_cast<std::size_t>(j)] = top.node;
        heap.push({nd, j});
      }
    }
  }
}

}  // namespace

SpecialMetricView::SpecialMetricView(GridField R_field)
    : R_(std::move(R_field)), memo_(std::make_shared<Memo>()) {
  for (double v : R_.values)
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError("SpecialMetricView: R must be finite and positive");
}

int SpecialMetricView::node_index(cplx z) const {
  const double fx = (z.real() - R_.origin.real()) / R_.spacing;
  const double fy = (z.imag() - R_.origin.imag()) / R_.spacing;
  const int ix = static_cast<int>(std::lround(fx));
  const int iy = static_cast<int>(std::lround(fy));
  if (ix < 0 || iy < 0 || ix >= R_.nx || iy >= R_.ny)
    throw ConfigError("SpecialMetricView: point outside the window");
  return iy * R_.nx + ix;
}

cplx SpecialMetricView::node_coord(int index) const {
  return R_.coord(index % R_.nx, index / R_.nx);
}

std::shared_ptr<const std::vector<double>> SpecialMetricView::distance_field(
    int source) const {
  {
    std::lock_guard<std::mutex> lock(memo_->mu);
    auto it = memo_->fields.find(source);
    if (it != memo_->fields.end()) return it->second;
  }
  auto dist = std::make_shared<std::vector<double>>(
      static_cast<std::size_t>(nodes()), kInf);
  (*dist)[static_cast<std::size_t>(source)] = 0.0;
  MinHeap heap;
  heap.push({0.0, source});
  sweep(R_, heap, *dist, nullptr, -1, kInf);
  std::shared_ptr<const std::vector<double>> out = dist;
  std::lock_guard<std::mutex> lock(memo_->mu);
  memo_->fields.emplace(source, out);
  return out;
}

std::vector<double> SpecialMetricView::multi_distance_field(
    const CellMask& sources) const {
  if (sources.nx != R_.nx || sources.ny != R_.ny)
    throw ConfigError("multi_distance_field: mask shape mismatch");
  std::vector<double> dist(static_cast<std::size_t>(nodes()), kInf);
  MinHeap heap;
  for (int iy = 0; iy < R_.ny; ++iy)
    for (int ix = 0; ix < R_.nx; ++ix)
      if (sources.test(ix, iy)) {
        const int i = iy * R_.nx + ix;
        dist[static_cast<std::size_t>(i)] = 0.0;
        heap.push({0.0, i});
      }
  if (heap.empty()) throw ConfigError("multi_distance_field: empty source set");
  sweep(R_, heap, dist, nullptr, -1, kInf);
  return dist;
}

double SpecialMetricView::bounded_distance(int source, int target,
                                           double cap) const {
  {
    // A memoized full field answers for free.
    std::lock_guard<std::mutex> lock(memo_->mu);
    auto it = memo_->fields.find(source);
    if (it != memo_->fields.end())
      return (*it->second)[static_cast<std::size_t>(target)];
  }
  std::vector<double> dist(static_cast<std::size_t>(nodes()), kInf);
  dist[static_cast<std::size_t>(source)] = 0.0;
  MinHeap heap;
  heap.push({0.0, source});
  sweep(R_, heap, dist, nullptr, target, cap);
  return dist[static_cast<std::size_t>(target)];
}

std::vector<double> SpecialMetricView::capped_distance_field(int source,
                                                             double cap) const {
  std::vector<double> dist(static_cast<std::size_t>(nodes()), kInf);
  dist[static_cast<std::size_t>(source)] = 0.0;
  MinHeap heap;
  heap.push({0.0, source});
  sweep(R_, heap, dist, nullptr, -1, cap);
  return dist;
}

double distance(const SpecialMetricView& view, cplx x, cplx y) {
  const int sx = view.node_index(x);
  const int sy = view.node_index(y);
  if (sx == sy) return 0.0;
  return (*view.distance_field(sx))[static_cast<std::size_t>(sy)];
}

std::vector<cplx> shortest_path(const SpecialMetricView& view, cplx x, cplx y) {
  const int sx = view.node_index(x);
  const int sy = view.node_index(y);
  std::vector<double> dist(static_cast<std::size_t>(view.nodes()), kInf);
  std::vector<int> pred(static_cast<std::size_t>(view.nodes()), -1);
  dist[static_cast<std::size_t>(sx)] = 0.0;
  MinHeap heap;
  heap.push({0.0, sx});
  sweep(view.R(), heap, dist, &pred, sy, kInf);
  std::vector<cplx> path;
  for (int n = sy; n != -1; n = pred[static_cast<std::size_t>(n)]) {
    path.push_back(view.node_coord(n));
    if (n == sx) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

CellMask neighborhood(const SpecialMetricView& view, const CellMask& U,
                      double r) {
  if (U.count() == 0) throw ConfigError("neighborhood: U is empty");
  if (r < 0.0) throw ConfigError("neighborhood: radius must be >= 0");
  const std::vector<double> dist = view.multi_distance_field(U);
  const GridField& R = view.R();
  CellMask out{R.nx, R.ny,
               std::vector<std::uint8_t>(static_cast<std::size_t>(R.nx) * R.ny, 0)};
  for (int iy = 0; iy < R.ny; ++iy)
    for (int ix = 0; ix < R.nx; ++ix) {
      if (dist[static_cast<std::size_t>(iy) * R.nx + ix] > r) continue;
      if (ix == 0 || iy == 0 || ix == R.nx - 1 || iy == R.ny - 1)
        throw ClippedError("neighborhood: result touches the window boundary");
      out.set(ix, iy);
    }
  return out;
}

Chain chain_index(const SpecialMetricView& view, const std::vector<cplx>& path) {
  if (path.empty()) throw ConfigError("chain_index: empty path");
  Chain chain;
  chain.points.push_back(path.front());
  cplx x = path.front();
  double target = 0.5 * view.R().value_at(x);
  std::size_t seg = 0;
  cplx pos = path.front();
  while (seg + 1 < path.size()) {
    // First crossing of |p - x| = target on the remaining polyline.
    const cplx a = pos;
    const cplx b = path[seg + 1];
    const cplx d = b - a;
    const cplx f = a - x;
    const double A = std::norm(d);
    const double B = 2.0 * (f.real() * d.real() + f.imag() * d.imag());
    const double C = std::norm(f) - target * target;
    double hit = -1.0;
    if (A > 0.0) {
      const double disc = B * B - 4.0 * A * C;
      if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        for (const double t : {(-B - s) / (2.0 * A), (-B + s) / (2.0 * A)}) {
          if (t >= 0.0 && t <= 1.0) {
            hit = t;
            break;
          }
        }
      }
    }
    if (hit >= 0.0 && C < 0.0) {
      // Inside the ball at `a`; crossing at parameter `hit`.
      const cplx next = a + hit * d;
      chain.points.push_back(next);
      x = next;
      target = 0.5 * view.R().value_at(x);
      pos = next;
      // stay on the current segment
    } else {
      pos = b;
      ++seg;
    }
  }
  if (std::abs(chain.points.back() - path.back()) > 0.0)
    chain.points.push_back(path.back());
  chain.index = static_cast<int>(chain.points.size()) - 1;
  return chain;
}

double rho_length(const SpecialMetricView& view, const std::vector<cplx>& path) {
  const double step = 0.5 * view.R().spacing;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const cplx a = path[i], b = path[i + 1];
    const double len = std::abs(b - a);
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int p = 0; p < pieces; ++p) {
      const cplx mid = a + (b - a) * ((p + 0.5) / pieces);
      acc += (len / pieces) / view.R().value_at(mid);
    }
  }
  return acc;
}

}  // namespace cazp
