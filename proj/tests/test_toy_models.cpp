#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cazp/common.hpp"
#include "cazp/rng.hpp"
#include "cazp/toy_models.hpp"

using namespace cazp;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
  double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("test function caches land on the analytic integrals") {
  TestFunction b = bump_function();
  CHECK(b.integral == doctest::Approx(M_PI / 4.0).epsilon(1e-6));
  CHECK(b.norm_h2 == doctest::Approx(M_PI / 7.0).epsilon(1e-6));
  CHECK(b.norm_grad2 == doctest::Approx(6.0 * M_PI / 5.0).epsilon(1e-6));
  CHECK(b.norm_lap2 == doctest::Approx(96.0 * M_PI / 5.0).epsilon(1e-6));
  CHECK(b.value(cplx{0.0, 0.0}) == 1.0);
  CHECK(b.value(cplx{1.0, 0.0}) == 0.0);
  CHECK(b.value(cplx{0.0, 2.0}) == 0.0);

  TestFunction bh = b;
  recompute_norms(bh, 0.5e-4);
  CHECK(std::abs(bh.integral - b.integral) < 1e-4 * b.integral);
  CHECK(std::abs(bh.norm_h2 - b.norm_h2) < 1e-4 * b.norm_h2);
  CHECK(std::abs(bh.norm_grad2 - b.norm_grad2) < 1e-4 * b.norm_grad2);
  CHECK(std::abs(bh.norm_lap2 - b.norm_lap2) < 1e-4 * b.norm_lap2);

  TestFunction g = gaussian_bump_function();
  CHECK(g.integral > 0.0);
  CHECK(g.norm_h2 > 0.0);
  CHECK(g.norm_grad2 > 0.0);
  CHECK(g.norm_lap2 > 0.0);
  CHECK(g.value(cplx{0.0, 0.0}) == 1.0);
  CHECK(g.value(cplx{1.0, 0.0}) == 0.0);
  TestFunction gh = g;
  recompute_norms(gh, 0.5e-4);
  CHECK(std::abs(gh.norm_lap2 - g.norm_lap2) < 1e-4 * g.norm_lap2);

  CHECK_THROWS_AS(recompute_norms(bh, 0.0), ConfigError);
}

TEST_CASE("forced hooks reproduce the exact lattices") {
  Rect rect{-3.0, -3.0, 3.0, 3.0};
  double a = std::sqrt(M_PI / 2.0);
  double b = std::sqrt(M_PI);

  PointProcessSample full = sample_process(ToyModel::S1_BERNOULLI, rect, 5, 0.0);
  CHECK(full.points.size() == 25);  // indices -2..2 both axes
  bool has_origin = false, has_corner = false;
  for (cplx p : full.points) {
    CHECK(rect.contains(p));
    if (std::abs(p) == 0.0) has_origin = true;
    if (std::abs(p - cplx{2.0 * a, -2.0 * a}) < 1e-12) has_corner = true;
  }
  CHECK(has_origin);
  CHECK(has_corner);

  PointProcessSample none = sample_process(ToyModel::S1_BERNOULLI, rect, 5, 1.0);
  CHECK(none.points.empty());

  PointProcessSample half = sample_process(ToyModel::S1_BERNOULLI, rect, 5);
  CHECK(half.points.size() > 1);
  CHECK(half.points.size() < 24);
  PointProcessSample half2 = sample_process(ToyModel::S1_BERNOULLI, rect, 5);
  CHECK(half.points == half2.points);

  PointProcessSample lat =
      sample_process(ToyModel::S2_GAUSSIAN_LATTICE, rect, 9, 0.5, 0.0);
  REQUIRE(lat.points.size() == 9);  // indices -1..1 both axes
  std::size_t idx = 0;
  for (int l = -1; l <= 1; ++l)
    for (int k = -1; k <= 1; ++k) {
      CHECK(lat.points[idx].real() == k * b);
      CHECK(lat.points[idx].imag() == l * b);
      ++idx;
    }

  PointProcessSample disp = sample_process(ToyModel::S2_GAUSSIAN_LATTICE, rect, 9);
  PointProcessSample disp2 = sample_process(ToyModel::S2_GAUSSIAN_LATTICE, rect, 9);
  CHECK(disp.points == disp2.points);
  for (cplx p : disp.points) CHECK(rect.contains(p));
}

TEST_CASE("linear statistic is an exact sum with a window guard") {
  TestFunction h = bump_function();
  Rect rect{-2.0, -2.0, 2.0, 2.0};
  PointProcessSample origin_only{ToyModel::S1_BERNOULLI, {cplx{0.0, 0.0}}, rect, 0, 2.0};
  CHECK(linear_statistic(origin_only, h, 1.0) == 1.0);
  CHECK(linear_statistic(origin_only, h, 4.0) == 1.0);
  CHECK_THROWS_AS(linear_statistic(origin_only, h, 4.1), ConfigError);
  CHECK_THROWS_AS(linear_statistic(origin_only, h, 0.0), ConfigError);

  PointProcessSample empty{ToyModel::S1_BERNOULLI, {}, rect, 0, 2.0};
  CHECK(linear_statistic(empty, h, 1.0) == 0.0);

  // Exhaustive lattice enumeration oracle at eta = 0 and L = 4.
  Rect wide{-7.0, -7.0, 7.0, 7.0};
  PointProcessSample lat =
      sample_process(ToyModel::S2_GAUSSIAN_LATTICE, wide, 3, 0.5, 0.0);
  double oracle = 0.0;
  double b = std::sqrt(M_PI);
  for (int l = -10; l <= 10; ++l)
    for (int k = -10; k <= 10; ++k)
      if (wide.contains(cplx{k * b, l * b}))
        oracle += h.value(cplx{k * b, l * b} / 2.0);
  CHECK(linear_statistic(lat, h, 4.0) == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("sampled intensities give unit mass per pi on aligned windows") {
  // Window edges on lattice cell boundaries: expected count = area / pi
  // exactly, with no quantization bias.
  double a = std::sqrt(M_PI / 2.0);
  double ha = 4.5 * a;
  Rect wa{-ha, -ha, ha, ha};  // 81 sites, area 81 pi / 2
  std::vector<double> counts;
  for (int t = 0; t < 400; ++t)
    counts.push_back(static_cast<double>(
        sample_process(ToyModel::S1_BERNOULLI, wa, substream(600, t)).points.size()));
  double sigma = std::sqrt(81.0 / 4.0 / 400.0);
  CHECK(std::abs(mean_of(counts) - 40.5) < 3.3 * sigma);

  double bsp = std::sqrt(M_PI);
  double hb = 3.5 * bsp;
  Rect wb{-hb, -hb, hb, hb};  // 49 sites, area 49 pi
  counts.clear();
  for (int t = 0; t < 400; ++t)
    counts.push_back(static_cast<double>(
        sample_process(ToyModel::S2_GAUSSIAN_LATTICE, wb, substream(601, t))
            .points.size()));
  double m = mean_of(counts);
  double se = std::sqrt(var_of(counts) / 400.0);
  CHECK(std::abs(m - 49.0) < 3.3 * se + 1e-9);
}

TEST_CASE("variance slopes recover the lattice laws") {
  // Support radius 3: the displaced-lattice variance approaches its flat
  // asymptote like 1 - |lap h|^2 / (4 L |grad h|^2), which is a 100%
  // correction at L = 4 for the unit bump but ~11% at support 3.
  TestFunction h = scaled_support(bump_function(), 3.0);
  std::vector<double> ladder{4.0, 8.0, 16.0, 32.0};

  SlopeReport s1 = variance_scaling(ToyModel::S1_BERNOULLI, h, ladder, 250, 901);
  CHECK(std::abs(s1.slope - 1.0) <= 0.3);
  CHECK(!s1.ci_wide);
  for (const VarianceRow& r : s1.rows) {
    CHECK(r.ci_lo <= r.var_z);
    CHECK(r.var_z <= r.ci_hi);
    // Mean law: E Z = L (1/pi) integral of h.
    double expect = r.L * h.integral / M_PI;
    CHECK(std::abs(r.mean_z - expect) <= 4.0 * std::sqrt(r.var_z / r.trials));
  }

  SlopeReport s2 = variance_scaling(ToyModel::S2_GAUSSIAN_LATTICE, h, ladder, 250, 902);
  CHECK(std::abs(s2.slope - 0.0) <= 0.3);
  CHECK(!s2.ci_wide);

  // Slope should not depend on which bump profile is used.
  SlopeReport s2g = variance_scaling(ToyModel::S2_GAUSSIAN_LATTICE,
                                     scaled_support(gaussian_bump_function(), 3.0),
                                     ladder, 250, 903);
  CHECK(std::abs(s2g.slope - 0.0) <= 0.3);

  CHECK_THROWS_AS(variance_scaling(ToyModel::S1_BERNOULLI, h, {4.0, 8.0, 16.0}, 250, 1),
                  ConfigError);
  CHECK_THROWS_AS(
      variance_scaling(ToyModel::S1_BERNOULLI, h, {4.0, 8.0, 16.0, 30.0}, 250, 1),
      ConfigError);
  CHECK_THROWS_AS(variance_scaling(ToyModel::S1_BERNOULLI, h, ladder, 100, 1),
                  ConfigError);
}

TEST_CASE("zero process windows must be centered and covered") {
  CHECK_THROWS_AS(sample_process(ToyModel::GEF, Rect{0.0, 0.0, 4.0, 4.0}, 7),
                  ConfigError);
  CHECK_THROWS_AS(
      sample_process(ToyModel::GEF, Rect{-0.3, -0.3, 0.3, 0.3}, 7),
      ConfigError);

  Rect rect{-3.2, -3.2, 3.2, 3.2};
  PointProcessSample zs = sample_process(ToyModel::GEF, rect, 7);
  CHECK(zs.covered_radius == 3.2);
  CHECK(zs.points.size() >= 4);   // expected count 3.2^2 = 10.24
  CHECK(zs.points.size() <= 20);
  for (cplx p : zs.points) CHECK(std::abs(p) <= 3.2);

  PointProcessSample zs2 = sample_process(ToyModel::GEF, rect, 7);
  CHECK(zs.points == zs2.points);

  TestFunction h = bump_function();
  double z9 = linear_statistic(zs, h, 9.0);
  CHECK(std::isfinite(z9));
  CHECK_THROWS_AS(linear_statistic(zs, h, 10.6), ConfigError);
}

TEST_CASE("disjoint seed blocks give consistent variance estimates") {
  TestFunction h = bump_function();
  Rect win{-2.0, -2.0, 2.0, 2.0};
  std::vector<double> z1, z2;
  for (int t = 0; t < 600; ++t) {
    z1.push_back(linear_statistic(
        sample_process(ToyModel::S1_BERNOULLI, win, substream(801, t)), h, 4.0));
    z2.push_back(linear_statistic(
        sample_process(ToyModel::S1_BERNOULLI, win, substream(802, t)), h, 4.0));
  }
  double v1 = var_of(z1), v2 = var_of(z2);
  CHECK(v1 > 0.0);
  CHECK(v2 > 0.0);
  // Two-sample log-variance z-test at the 1% level: sd of log s^2 is about
  // sqrt(2/n) each, so the 99% bound on the difference is 2.576 sqrt(4/n).
  CHECK(std::abs(std::log(v1 / v2)) <= 2.576 * std::sqrt(4.0 / 599.0) + 0.05);
}

TEST_CASE("csv writers emit one row per entry") {
  TestFunction h = bump_function();
  std::vector<double> ladder{4.0, 8.0, 16.0, 32.0};
  SlopeReport rep = variance_scaling(ToyModel::S1_BERNOULLI, h, ladder, 200, 904);

  const char* vpath = "/tmp/cazp_test_variance.csv";
  const char* spath = "/tmp/cazp_test_slopes.csv";
  write_variance_csv(rep.rows, vpath);
  write_slopes_csv({rep}, spath);

  auto read_lines = [](const char* path) {
    std::FILE* f = std::fopen(path, "r");
    REQUIRE(f != nullptr);
    std::vector<std::string> lines;
    char buf[512];
    while (std::fgets(buf, sizeof buf, f)) lines.emplace_back(buf);
    std::fclose(f);
    return lines;
  };
  std::vector<std::string> vlines = read_lines(vpath);
  REQUIRE(vlines.size() == 5);
  CHECK(vlines[0] == "model,L,trials,mean_Z,var_Z,ci_lo,ci_hi\n");
  CHECK(vlines[1].rfind("s1_bernoulli,4,200,", 0) == 0);

  std::vector<std::string> slines = read_lines(spath);
  REQUIRE(slines.size() == 2);
  CHECK(slines[0] == "model,slope,ci_lo,ci_hi\n");
  CHECK(slines[1].rfind("s1_bernoulli,", 0) == 0);

  std::remove(vpath);
  std::remove(spath);
}
