#include "cazp/special_metric.hpp"

#include <cmath>
#include <vector>

#include "cazp/rng.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cazp;

namespace {

GridField constant_R(double c, double halfwidth, double h) {
  GridField g = make_grid({0.0, 0.0}, halfwidth, h);
  std::fill(g.values.begin(), g.values.end(), c);
  return g;
}

// One realistic R field built from a trial; working region |z| <= 5, field
// grid wide enough that R is exact there (envelope reach ~ gmax - sqrt(c)).
struct Fixture {
  GefSample sample;
  SpecialMetricView view;
  double const_c;
};

const Fixture& fixture() {
  static Fixture* f = [] {
    const double cc = 16.0;
    GefSample s = make_sample(substream(1300, 0), 16.5);
    const GridField phi = potential_grid(s, {0.0, 0.0}, 10.5, 0.1);
    const MollifierKernel k = make_kernel(0.1, 1.0);
    const GridField F = convolve(absolute_patched(phi).field, k);
    return new Fixture{std::move(s), SpecialMetricView(compute_R(F, cc)), cc};
  }();
  return *f;
}

// Uniform random point in the square |Re|,|Im| <= w.
cplx rand_pt(std::uint64_t stream, int t, double w) {
  return {w * (2.0 * uniform01(9, stream, t) - 1.0),
          w * (2.0 * uniform01(10, stream, t) - 1.0)};
}

}  // namespace

TEST_CASE("uniform R reproduces chamfer distances") {
  const SpecialMetricView v(constant_R(2.0, 4.0, 0.1));
  CHECK(distance(v, {0.0, 0.0}, {0.0, 0.0}) == 0.0);
  CHECK(distance(v, {0.0, 0.0}, {3.0, 0.0}) == doctest::Approx(1.5).epsilon(0.01));
  CHECK(distance(v, {0.0, 0.0}, {1.0, 1.0}) ==
        doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-9));
  // Worst-direction overshoot of the 8-connected metric is ~8.24%.
  const double d21 = distance(v, {0.0, 0.0}, {2.0, 1.0});
  const double exact = std::sqrt(5.0) / 2.0;
  CHECK(d21 >= exact - 1e-9);
  CHECK(d21 <= 1.083 * exact);
}

TEST_CASE("graph distances match a Floyd-Warshall oracle on a small grid") {
  GridField R = make_grid({0.0, 0.0}, 0.4, 0.1);  // 9x9 nodes
  for (int iy = 0; iy < R.ny; ++iy)
    for (int ix = 0; ix < R.nx; ++ix)
      R.at(ix, iy) = 0.5 + 2.0 * uniform01(1717, iy, ix);
  const int n = R.nx * R.ny;
  std::vector<double> fw(static_cast<std::size_t>(n) * n, 1e18);
  for (int i = 0; i < n; ++i) fw[static_cast<std::size_t>(i) * n + i] = 0.0;
  const int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  for (int iy = 0; iy < R.ny; ++iy)
    for (int ix = 0; ix < R.nx; ++ix)
      for (int k = 0; k < 8; ++k) {
        const int jx = ix + dx[k], jy = iy + dy[k];
        if (jx < 0 || jy < 0 || jx >= R.nx || jy >= R.ny) continue;
        const double len = (k < 4 ? 1.0 : M_SQRT2) * R.spacing;
        const double w = len * 2.0 / (R.at(ix, iy) + R.at(jx, jy));
        fw[static_cast<std::size_t>(iy * R.nx + ix) * n + (jy * R.nx + jx)] = w;
      }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        fw[static_cast<std::size_t>(i) * n + j] =
            std::min(fw[static_cast<std::size_t>(i) * n + j],
                     fw[static_cast<std::size_t>(i) * n + k] +
                         fw[static_cast<std::size_t>(k) * n + j]);

  const SpecialMetricView v(R);
  for (int i = 0; i < n; i += 7) {
    const auto field = v.distance_field(i);
    for (int j = 0; j < n; ++j)
      CHECK(std::abs((*field)[static_cast<std::size_t>(j)] -
                     fw[static_cast<std::size_t>(i) * n + j]) < 1e-12);
  }
}

TEST_CASE("metric axioms hold on sampled pairs and triples") {
  const SpecialMetricView& v = fixture().view;
  for (int t = 0; t < 12; ++t) {
    const cplx a = rand_pt(21, t, 5.0), b = rand_pt(22, t, 5.0),
               c = rand_pt(23, t, 5.0);
    const double ab = distance(v, a, b);
    CHECK(std::abs(ab - distance(v, b, a)) < 1e-10);
    CHECK(distance(v, a, c) <= ab + distance(v, b, c) + 1e-10);
  }
}

TEST_CASE("ball comparability: R varies by at most half within half-R balls") {
  const GridField& R = fixture().view.R();
  int tested = 0;
  for (int t = 0; tested < 2000 && t < 20000; ++t) {
    const cplx x = rand_pt(31, t, 5.0);
    const cplx y = rand_pt(32, t, 5.0);
    const int xi = fixture().view.node_index(x);
    const int yi = fixture().view.node_index(y);
    const cplx xn = fixture().view.node_coord(xi);
    const cplx yn = fixture().view.node_coord(yi);
    const double Rx = R.values[static_cast<std::size_t>(xi)];
    if (std::abs(yn - xn) > 0.5 * Rx) continue;
    const double Ry = R.values[static_cast<std::size_t>(yi)];
    CHECK(Ry >= 0.5 * Rx - 1e-9);
    CHECK(Ry <= 1.5 * Rx + 1e-9);
    ++tested;
  }
  CHECK(tested == 2000);
}

TEST_CASE("half-R hops cost at most one unit of metric") {
  const SpecialMetricView& v = fixture().view;
  const GridField& R = v.R();
  int tested = 0;
  for (int t = 0; tested < 300 && t < 20000; ++t) {
    const cplx x = rand_pt(41, t, 5.0);
    const cplx y = rand_pt(42, t, 5.0);
    const double Rx = R.values[static_cast<std::size_t>(v.node_index(x))];
    if (std::abs(y - x) > 0.5 * Rx) continue;
    CHECK(distance(v, x, y) <= 1.0 + 0.1);
    ++tested;
  }
  CHECK(tested == 300);
}

TEST_CASE("metric balls contain Euclidean information") {
  // |x - y| <= 2^{3 rho} R(x); the graph distance only overestimates rho,
  // so the bound is assertable exactly.
  const SpecialMetricView& v = fixture().view;
  const GridField& R = v.R();
  for (int t = 0; t < 400; ++t) {
    const cplx x = rand_pt(51, t, 5.0);
    const cplx y = rand_pt(52, t, 5.0);
    const double d = distance(v, x, y);
    const double Rx = R.values[static_cast<std::size_t>(v.node_index(x))];
    const cplx xn = v.node_coord(v.node_index(x));
    const cplx yn = v.node_coord(v.node_index(y));
    CHECK(std::abs(xn - yn) <= std::exp2(3.0 * d) * Rx + 1e-9);
  }
}

TEST_CASE("quadrupling const_c halves all distances") {
  const Fixture& f = fixture();
  const GridField phi = potential_grid(f.sample, {0.0, 0.0}, 10.5, 0.1);
  const MollifierKernel k = make_kernel(0.1, 1.0);
  const GridField F = convolve(absolute_patched(phi).field, k);
  const SpecialMetricView v2(compute_R(F, 4.0 * f.const_c));
  for (int t = 0; t < 12; ++t) {
    const cplx a = rand_pt(61, t, 5.0), b = rand_pt(62, t, 5.0);
    CHECK(distance(v2, a, b) <= 0.5 * distance(f.view, a, b) + 1e-9);
  }
}

TEST_CASE("neighborhoods: identity at r=0, disk shape, nesting, clipping") {
  const SpecialMetricView uv(constant_R(1.0, 4.0, 0.1));
  CellMask U = CellMask::empty(uv.R());
  const int cx = uv.R().nx / 2, cy = uv.R().ny / 2;
  U.set(cx, cy);

  const CellMask same = neighborhood(uv, U, 0.0);
  CHECK(same.count() == 1);
  CHECK(same.test(cx, cy));

  const CellMask disk = neighborhood(uv, U, 2.0);
  for (int iy = 0; iy < uv.R().ny; ++iy)
    for (int ix = 0; ix < uv.R().nx; ++ix) {
      const double d = std::abs(uv.R().coord(ix, iy) - uv.R().coord(cx, cy));
      if (disk.test(ix, iy)) CHECK(d <= 2.0 + 1e-9);
      if (d <= 2.0 / 1.083 - 0.15) CHECK(disk.test(ix, iy));
    }

  const CellMask inner = neighborhood(uv, U, 1.0);
  for (int iy = 0; iy < uv.R().ny; ++iy)
    for (int ix = 0; ix < uv.R().nx; ++ix)
      if (inner.test(ix, iy)) CHECK(disk.test(ix, iy));

  CHECK_THROWS_AS(neighborhood(uv, U, 10.0), ClippedError);
  CHECK_THROWS_AS(neighborhood(uv, CellMask::empty(uv.R()), 1.0), ConfigError);
}

TEST_CASE("chain construction follows the first-exit rule") {
  const SpecialMetricView uv(constant_R(1.0, 4.0, 0.1));

  // Short path: never leaves the first half-R ball.
  const Chain tiny = chain_index(uv, {{0.0, 0.0}, {0.3, 0.1}});
  CHECK(tiny.index == 1);
  CHECK(tiny.points.back() == cplx{0.3, 0.1});

  // Straight run of length 2 with R = 1: steps of 1/2.
  const Chain straight = chain_index(uv, {{-1.0, 0.0}, {1.0, 0.0}});
  CHECK(straight.index >= 4);
  CHECK(straight.index <= 5);
  for (std::size_t j = 0; j + 1 < straight.points.size() - 1; ++j)
    CHECK(std::abs(straight.points[j + 1] - straight.points[j]) ==
          doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("chain index is bounded by three times the rho-length plus one") {
  const SpecialMetricView& v = fixture().view;
  for (int t = 0; t < 60; ++t) {
    const cplx a = rand_pt(71, t, 5.0);
    const cplx b = rand_pt(72, t, 5.0);
    const std::vector<cplx> path = shortest_path(v, a, b);
    if (path.size() < 2) continue;
    const Chain ch = chain_index(v, path);
    CHECK(ch.index <= 3.0 * rho_length(v, path) + 1.0 + 0.5);
  }
}
