#include "cazp/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cazp/basin_transport.hpp"
#include "cazp/common.hpp"
#include "cazp/gef_core.hpp"
#include "cazp/matching.hpp"
#include "cazp/potential_field.hpp"
#include "cazp/rng.hpp"
#include "cazp/special_metric.hpp"
#include "cazp/stats.hpp"
#include "cazp/toy_models.hpp"
#include "cazp/zero_finder.hpp"

namespace cazp::cli {
namespace {

using nlohmann::json;

const double kSqrtPi = std::sqrt(M_PI);
const double kSqrt2 = std::sqrt(2.0);
constexpr int kSetsPerTrial = 10;
constexpr int kCalibSets = 6;
const std::vector<double> kCalibGrid{4.0, 9.0, 16.0, 25.0, 36.0};
const std::vector<double> kToyLadder{4.0, 8.0, 16.0, 32.0};
constexpr int kToyMinTrials = 200;

// ---- artifact bookkeeping --------------------------------------------------

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct FileRecord {
  std::string name;
  std::size_t bytes = 0;
  std::string hash;
};

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("short write to " + path.string());
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read back " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runner-owned CSV: written from an in-memory buffer, hashed from the same
// bytes.
void emit(const std::filesystem::path& dir, const std::string& name,
          const std::string& content, std::vector<FileRecord>& files) {
  write_text(dir / name, content);
  files.push_back({name, content.size(), fnv1a64_hex(content)});
}

// Module-owned CSV already on disk: hash what the writer produced.
void record(const std::filesystem::path& dir, const std::string& name,
            std::vector<FileRecord>& files) {
  const std::string bytes = read_bytes(dir / name);
  files.push_back({name, bytes.size(), fnv1a64_hex(bytes)});
}

std::string sanitize(std::string msg) {
  for (char& c : msg)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return msg;
}

// ---- trial worker pool -----------------------------------------------------

template <typename T>
struct Slot {
  T value{};
  std::exception_ptr err;
};

// Work items are claimed off an atomic counter, so seeds derive from the
// trial index alone and results land in per-trial slots; flushing in index
// order keeps the bytes independent of the schedule. After a failure,
// already-claimed earlier trials still finish, so every slot below the first
// failed index is complete.
template <typename T>
std::vector<Slot<T>> pool_map(int trials, int jobs,
                              const std::function<T(int)>& fn) {
  std::vector<Slot<T>> out(static_cast<std::size_t>(trials));
  std::atomic<int> next{0};
  std::atomic<bool> stop{false};
  auto worker = [&] {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= trials || stop.load()) return;
      Slot<T>& slot = out[static_cast<std::size_t>(t)];
      try {
        slot.value = fn(t);
      } catch (...) {
        slot.err = std::current_exception();
        stop.store(true);
      }
    }
  };
  const int n = std::clamp(jobs, 1, trials);
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) threads.emplace_back(worker);
    for (std::thread& th : threads) th.join();
  }
  return out;
}

// First failed slot in index order; -1 when the whole pool succeeded.
template <typename T>
int first_failure(const std::vector<Slot<T>>& slots, std::string& msg,
                  int& code) {
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].err) continue;
    try {
      std::rethrow_exception(slots[i].err);
    } catch (const ConfigError& e) {
      msg = e.what();
      code = 2;
    } catch (const std::exception& e) {
      msg = e.what();
      code = 4;
    }
    return static_cast<int>(i);
  }
  return -1;
}

// ---- shared sample pipeline -------------------------------------------------

// Grid sizes for the comparison experiments. Metric neighborhoods of
// rho-radius 5 reach about 5 * mean R past the set, and mean R tracks
// 1.12 sqrt(const_c) on sampled fields; 1.5 leaves headroom for field
// fluctuation, on top of a 3.9 set extent.
struct VerifyGeometry {
  double r_halfwidth;
  double pot_halfwidth;
  double zeros_disk;
  double sample_radius;
};

VerifyGeometry verify_geometry(double const_c, double kernel_radius) {
  VerifyGeometry g{};
  g.r_halfwidth = 5.5 + 7.5 * std::sqrt(const_c);
  g.pot_halfwidth = g.r_halfwidth + kernel_radius;
  g.zeros_disk = g.r_halfwidth + 2.0;
  g.sample_radius = g.pot_halfwidth * kSqrt2 + 3.2;
  return g;
}

// Matching only queries the metric near the window, so the field grid hugs
// it; zeros must cover the window circumradius, and the sample must stay
// reliable out to the field grid's corner.
struct MatchGeometry {
  double pot_halfwidth;
  double zeros_disk;
  double sample_radius;
};

MatchGeometry match_geometry(double window, double kernel_radius) {
  MatchGeometry g{};
  g.pot_halfwidth = window + 1.9 + kernel_radius;
  g.zeros_disk = window * kSqrt2 + 0.5;
  g.sample_radius = std::max(g.zeros_disk, g.pot_halfwidth * kSqrt2 + 3.2);
  return g;
}

struct TrialField {
  GefSample sample;
  SpecialMetricView view;
  ZeroSet zeros;
};

TrialField build_field(const ExperimentConfig& cfg, int trial,
                       double pot_halfwidth, double zeros_disk,
                       double sample_radius, double const_c) {
  GefSample s = make_sample(substream(cfg.seed, static_cast<std::uint64_t>(trial)),
                            sample_radius, cfg.truncation_tol);
  const GridField phi =
      potential_grid(s, {0.0, 0.0}, pot_halfwidth, cfg.grid_spacing);
  const GridField F = convolve(absolute_patched(phi).field,
                               make_kernel(cfg.grid_spacing, cfg.kernel_radius));
  SpecialMetricView view(compute_R(F, const_c));
  ZeroSet zeros = find_zeros_expanding(s, zeros_disk);
  return {std::move(s), std::move(view), std::move(zeros)};
}

// ---- cell-set family for the comparison experiments -------------------------

CellMask disk_cells(const GridField& g, cplx c, double r) {
  CellMask m = CellMask::empty(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      if (std::abs(g.coord(ix, iy) - c) <= r) m.set(ix, iy);
  return m;
}

CellMask rect_cells(const GridField& g, cplx c, double hx, double hy) {
  CellMask m = CellMask::empty(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const cplx z = g.coord(ix, iy);
      if (std::abs(z.real() - c.real()) <= hx &&
          std::abs(z.imag() - c.imag()) <= hy)
        m.set(ix, iy);
    }
  return m;
}

CellMask merge(CellMask a, const CellMask& b) {
  for (std::size_t i = 0; i < a.bits.size(); ++i)
    if (b.bits[i]) a.bits[i] = 1;
  return a;
}

// Disks, rectangles and two-disk unions with centers in [-2,2]^2; the family
// is a deterministic function of (seed, trial, index) and never of const_c,
// so calibration scans compare identical sets.
CellMask comparison_set(const GridField& g, std::uint64_t seed, int trial,
                        int index, std::string& shape) {
  const std::uint64_t stream = static_cast<std::uint64_t>(trial);
  auto u = [&](int salt) {
    return uniform01(seed, stream, static_cast<std::uint64_t>(index),
                     static_cast<std::uint64_t>(salt));
  };
  const cplx c{4.0 * u(0) - 2.0, 4.0 * u(1) - 2.0};
  switch (index % 3) {
    case 0:
      shape = "disk";
      return disk_cells(g, c, 0.75 + 0.2 * u(2));
    case 1:
      shape = "rect";
      return rect_cells(g, c, 0.7 + 0.3 * u(2), 0.75 + 0.25 * u(3));
    default:
      shape = "union";
      return merge(disk_cells(g, c, 0.7),
                   disk_cells(g, c + cplx{1.2, 0.5}, 0.7));
  }
}

// ---- experiments -------------------------------------------------------------

int run_sample(const ExperimentConfig& cfg, const std::filesystem::path& dir,
               std::vector<FileRecord>& files, json& summary) {
  const double window = effective_window(cfg);
  std::function<std::string(int)> work = [&](int t) {
    const GefSample s =
        make_sample(substream(cfg.seed, static_cast<std::uint64_t>(t)),
                    window + 0.5, cfg.truncation_tol);
    ZeroSet zeros = find_zeros_expanding(s, window);
    std::sort(zeros.points.begin(), zeros.points.end(), [](cplx a, cplx b) {
      return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
    });
    std::string rows;
    char buf[96];
    for (const cplx z : zeros.points) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", t, z.real(), z.imag());
      rows += buf;
    }
    return rows;
  };
  const auto slots = pool_map(cfg.trials, cfg.jobs, work);

  std::string msg;
  int code = 0;
  const int fail = first_failure(slots, msg, code);
  std::string content = "trial,zero_re,zero_im\n";
  std::size_t zeros_total = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    if (fail >= 0 && t >= fail) break;
    content += slots[static_cast<std::size_t>(t)].value;
    zeros_total += static_cast<std::size_t>(
        std::count(slots[static_cast<std::size_t>(t)].value.begin(),
                   slots[static_cast<std::size_t>(t)].value.end(), '\n'));
  }
  if (fail >= 0) content += "FAILED," + sanitize(msg) + "\n";
  emit(dir, "zeros.csv", content, files);
  summary["zeros_total"] = zeros_total;
  summary["disk_radius"] = window;
  if (fail >= 0) summary["error"] = msg;
  return code;
}

struct VerifyTrial {
  std::string rows;
  int passed = 0;
  int total = 0;
};

// One trial of the count/mass comparison experiment at floor constant `cc`.
VerifyTrial verify_one_trial(const ExperimentConfig& cfg, double cc,
                             int sets_per_trial, int t) {
  const VerifyGeometry geo = verify_geometry(cc, cfg.kernel_radius);
  const TrialField f = build_field(cfg, t, geo.pot_halfwidth, geo.zeros_disk,
                                   geo.sample_radius, cc);
  const std::uint64_t set_seed = substream(cfg.seed, 0x5e75);
  VerifyTrial out;
  char buf[256];
  for (int i = 0; i < sets_per_trial; ++i) {
    std::string shape;
    const CellMask u = comparison_set(f.view.R(), set_seed, t, i, shape);
    const HallReport hall = verify_hall(f.zeros, f.view, u);
    const LemmaReport lemma = verify_main_lemma(f.zeros, f.view, u);
    std::snprintf(buf, sizeof buf,
                  "%d,%d,%s,%d,%.17g,%d,%.17g,%d,%d,%.17g\n", t, i,
                  shape.c_str(), hall.pass ? 1 : 0, hall.margin,
                  lemma.pass ? 1 : 0, lemma.margin, hall.n_psi_u, hall.n_u,
                  hall.m_u);
    out.rows += buf;
    out.total += 1;
    if (hall.pass && lemma.pass) out.passed += 1;
  }
  return out;
}

constexpr const char* kVerifyHeader =
    "trial,set_index,shape,hall_pass,hall_margin,lemma_pass,lemma_margin,"
    "zeros_in_set,sites_in_set,set_area\n";

int run_verify(const ExperimentConfig& cfg, const std::filesystem::path& dir,
               std::vector<FileRecord>& files, json& summary) {
  std::function<VerifyTrial(int)> work = [&](int t) {
    return verify_one_trial(cfg, cfg.const_c, kSetsPerTrial, t);
  };
  const auto slots = pool_map(cfg.trials, cfg.jobs, work);

  std::string msg;
  int code = 0;
  const int fail = first_failure(slots, msg, code);
  std::string content = kVerifyHeader;
  int passed = 0, total = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    if (fail >= 0 && t >= fail) break;
    const VerifyTrial& v = slots[static_cast<std::size_t>(t)].value;
    content += v.rows;
    passed += v.passed;
    total += v.total;
  }
  if (fail >= 0) content += "FAILED," + sanitize(msg) + "\n";
  emit(dir, "verify.csv", content, files);
  summary["sets_total"] = total;
  summary["sets_passed"] = passed;
  summary["pass_fraction"] = total > 0 ? double(passed) / total : 0.0;
  if (fail >= 0) {
    summary["error"] = msg;
    return code;
  }
  return passed == total ? 0 : 3;
}

struct MatchTrial {
  std::vector<DisplacementRow> rows;
};

int run_match(const ExperimentConfig& cfg, const std::filesystem::path& dir,
              std::vector<FileRecord>& files, json& summary) {
  const double window = effective_window(cfg);
  const MatchGeometry geo = match_geometry(window, cfg.kernel_radius);
  std::function<MatchTrial(int)> work = [&](int t) {
    const TrialField f = build_field(cfg, t, geo.pot_halfwidth, geo.zeros_disk,
                                     geo.sample_radius, cfg.const_c);
    const LatticeWindow lattice =
        make_lattice(Rect{-window, -window, window, window},
                     default_buffer(f.view.R()));
    const Matching hall =
        build_matching(f.zeros, lattice, f.view, cfg.rho_threshold);
    const Matching mincost =
        min_cost_matching(f.zeros, lattice, f.view, cfg.rho_threshold);
    MatchTrial out;
    out.rows = displacement_rows(hall, t, "hall");
    const std::vector<DisplacementRow> mc = displacement_rows(mincost, t, "mincost");
    out.rows.insert(out.rows.end(), mc.begin(), mc.end());
    return out;
  };
  const auto slots = pool_map(cfg.trials, cfg.jobs, work);

  std::string msg;
  int code = 0;
  const int fail = first_failure(slots, msg, code);
  std::vector<DisplacementRow> rows;
  for (int t = 0; t < cfg.trials; ++t) {
    if (fail >= 0 && t >= fail) break;
    const MatchTrial& v = slots[static_cast<std::size_t>(t)].value;
    rows.insert(rows.end(), v.rows.begin(), v.rows.end());
  }
  write_displacements_csv(rows, (dir / "displacements.csv").string());
  if (fail >= 0) {
    std::ofstream app(dir / "displacements.csv", std::ios::app);
    app << "FAILED," << sanitize(msg) << "\n";
  }
  record(dir, "displacements.csv", files);

  // Tail fits need >= 1000 interior displacements per matcher; with fewer,
  // the statistic is skipped rather than fitted on noise.
  std::vector<std::pair<std::string, TailReport>> fits;
  for (const std::string matcher : {"hall", "mincost"}) {
    std::vector<double> abs_xi;
    for (const DisplacementRow& r : rows)
      if (r.matcher == matcher) abs_xi.push_back(r.abs_xi);
    summary["interior_rows_" + matcher] = abs_xi.size();
    if (abs_xi.size() >= 1000) {
      fits.emplace_back("abs_xi_" + matcher, fit_gaussian_tail(abs_xi));
      const TailReport& tr = fits.back().second;
      summary["fit_rate_" + matcher] = tr.rate;
      summary["fit_quality_" + matcher] = tr.quality;
    }
  }
  write_tails_csv(fits, (dir / "tails.csv").string());
  record(dir, "tails.csv", files);
  if (fail >= 0) summary["error"] = msg;
  return code;
}

struct BasinTrial {
  std::vector<BasinRow> rows;
  std::size_t escaped = 0;
  std::size_t unresolved = 0;
};

int run_basins(const ExperimentConfig& cfg, const std::filesystem::path& dir,
               std::vector<FileRecord>& files, json& summary) {
  const double window = effective_window(cfg);
  const double corner = window * kSqrt2;
  // Rim cells can drain to zeros a little beyond the guard margin of 2, so
  // the catalogue goes 3.5 past the corner to keep them resolvable.
  std::function<BasinTrial(int)> work = [&](int t) {
    const GefSample s =
        make_sample(substream(cfg.seed, static_cast<std::uint64_t>(t)),
                    corner + 6.0, cfg.truncation_tol);
    const ZeroSet zeros = find_zeros_expanding(s, corner + 3.5);
    const GridField grid = make_grid({0.0, 0.0}, window, cfg.grid_spacing);
    const BasinMap map = basin_partition(s, zeros, grid);
    BasinTrial out;
    out.rows = basin_rows(map, t);
    out.escaped = map.escaped_cells;
    out.unresolved = map.unresolved_cells;
    return out;
  };
  const auto slots = pool_map(cfg.trials, cfg.jobs, work);

  std::string msg;
  int code = 0;
  const int fail = first_failure(slots, msg, code);
  std::vector<BasinRow> rows;
  std::size_t escaped = 0, unresolved = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    if (fail >= 0 && t >= fail) break;
    const BasinTrial& v = slots[static_cast<std::size_t>(t)].value;
    rows.insert(rows.end(), v.rows.begin(), v.rows.end());
    escaped += v.escaped;
    unresolved += v.unresolved;
  }
  write_basins_csv(rows, (dir / "basins.csv").string());
  if (fail >= 0) {
    std::ofstream app(dir / "basins.csv", std::ios::app);
    app << "FAILED," << sanitize(msg) << "\n";
  }
  record(dir, "basins.csv", files);
  summary["basins_total"] = rows.size();
  summary["escaped_cells"] = escaped;
  summary["unresolved_cells"] = unresolved;
  if (fail >= 0) summary["error"] = msg;
  return code;
}

int run_toys(const ExperimentConfig& cfg, const std::filesystem::path& dir,
             std::vector<FileRecord>& files, json& summary) {
  const int trials = std::max(kToyMinTrials, cfg.trials);
  const TestFunction h = scaled_support(bump_function(), 3.0);
  std::vector<VarianceRow> var_rows;
  std::vector<SlopeReport> slopes;
  std::string msg;
  int code = 0;
  try {
    for (const ToyModel model :
         {ToyModel::S1_BERNOULLI, ToyModel::S2_GAUSSIAN_LATTICE, ToyModel::GEF}) {
      SlopeReport rep = variance_scaling(model, h, kToyLadder, trials, cfg.seed);
      var_rows.insert(var_rows.end(), rep.rows.begin(), rep.rows.end());
      summary[std::string("slope_") + model_name(model)] = rep.slope;
      slopes.push_back(std::move(rep));
    }
  } catch (const ConfigError& e) {
    msg = e.what();
    code = 2;
  } catch (const std::exception& e) {
    msg = e.what();
    code = 4;
  }
  write_variance_csv(var_rows, (dir / "variance.csv").string());
  write_slopes_csv(slopes, (dir / "slopes.csv").string());
  if (code != 0) {
    for (const char* name : {"variance.csv", "slopes.csv"}) {
      std::ofstream app(dir / name, std::ios::app);
      app << "FAILED," << sanitize(msg) << "\n";
    }
    summary["error"] = msg;
  }
  record(dir, "variance.csv", files);
  record(dir, "slopes.csv", files);
  summary["trials_per_L"] = trials;
  return code;
}

int run_calibrate(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                  std::vector<FileRecord>& files, json& summary) {
  // The comparisons only gain slack as const_c grows (every neighborhood
  // widens), so the scan ascends and stops at the first fully passing value.
  std::string content = "const_c,trials,sets,pass_fraction\n";
  double chosen = 0.0;
  std::string msg;
  int code = 0;
  for (const double cc : kCalibGrid) {
    std::function<VerifyTrial(int)> work = [&](int t) {
      return verify_one_trial(cfg, cc, kCalibSets, t);
    };
    const auto slots = pool_map(cfg.trials, cfg.jobs, work);
    const int fail = first_failure(slots, msg, code);
    if (fail >= 0) break;
    int passed = 0, total = 0;
    for (const auto& s : slots) {
      passed += s.value.passed;
      total += s.value.total;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g,%d,%d,%.17g\n", cc, cfg.trials, total,
                  total > 0 ? double(passed) / total : 0.0);
    content += buf;
    if (passed == total && total > 0) {
      chosen = cc;
      break;
    }
  }
  if (code != 0) content += "FAILED," + sanitize(msg) + "\n";
  emit(dir, "calibrate.csv", content, files);
  if (code != 0) {
    summary["error"] = msg;
    return code;
  }
  summary["calibrated_const_c"] = chosen;
  if (chosen == 0.0) return 3;
  std::printf("calibrated const_c = %g\n", chosen);
  return 0;
}

}  // namespace

// ---- configuration -----------------------------------------------------------

double effective_window(const ExperimentConfig& cfg) {
  return cfg.window_halfwidth > 0.0 ? cfg.window_halfwidth : 8.0 * kSqrtPi;
}

void validate_config(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (cfg.trials < 1) fail("trials must be >= 1");
  if (cfg.jobs < 1) fail("jobs must be >= 1");
  if (cfg.window_halfwidth != 0.0 && cfg.window_halfwidth < 4.0 * kSqrtPi)
    fail("window_halfwidth must be >= 4 sqrt(pi), about 7.0898");
  if (!(cfg.grid_spacing > 0.0)) fail("grid_spacing must be positive");
  if (!(cfg.const_c > 0.0)) fail("const_c must be positive");
  if (!(cfg.rho_threshold > 0.0)) fail("rho_threshold must be positive");
  if (!(cfg.kernel_radius > 0.0)) fail("kernel_radius must be positive");
  if (!(cfg.truncation_tol > 0.0 && cfg.truncation_tol < 1.0))
    fail("truncation_tol must be in (0,1)");
}

void set_config_key(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value, const std::string& where) {
  auto fail = [&](const std::string& m) {
    throw ConfigError(where + ": " + m);
  };
  auto as_u64 = [&]() -> std::uint64_t {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty())
      fail("invalid integer '" + value + "' for " + key);
    return v;
  };
  auto as_int = [&]() -> int {
    const std::uint64_t v = as_u64();
    if (v > 1000000) fail(key + " out of range");
    return static_cast<int>(v);
  };
  auto as_double = [&]() -> double {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty())
      fail("invalid number '" + value + "' for " + key);
    return v;
  };
  if (key == "seed")
    cfg.seed = as_u64();
  else if (key == "trials")
    cfg.trials = as_int();
  else if (key == "jobs")
    cfg.jobs = as_int();
  else if (key == "window_halfwidth")
    cfg.window_halfwidth = as_double();
  else if (key == "grid_spacing")
    cfg.grid_spacing = as_double();
  else if (key == "const_c")
    cfg.const_c = as_double();
  else if (key == "rho_threshold")
    cfg.rho_threshold = as_double();
  else if (key == "kernel_radius")
    cfg.kernel_radius = as_double();
  else if (key == "truncation_tol")
    cfg.truncation_tol = as_double();
  else if (key == "output_dir")
    cfg.output_dir = value;
  else
    fail("unknown key '" + key + "'");
}

ExperimentConfig load_config_file(const std::string& path,
                                  const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  ExperimentConfig cfg = base;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key=value, got '" + body + "'");
    set_config_key(cfg, trim(body.substr(0, eq)), trim(body.substr(eq + 1)),
                   where);
  }
  return cfg;
}

// ---- entry point ---------------------------------------------------------------

int run(const std::string& experiment, const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  json summary = json::object();
  std::vector<FileRecord> files;
  int code = 0;
  std::string error;
  std::filesystem::path dir;
  try {
    validate_config(cfg);
    std::string out = cfg.output_dir;
    if (out.empty()) {
      const char* env = std::getenv(kOutputDirEnvVar);
      out = env && *env ? env : ".";
    }
    dir = out;
    std::filesystem::create_directories(dir);

    if (experiment == "sample")
      code = run_sample(cfg, dir, files, summary);
    else if (experiment == "verify")
      code = run_verify(cfg, dir, files, summary);
    else if (experiment == "match")
      code = run_match(cfg, dir, files, summary);
    else if (experiment == "basins")
      code = run_basins(cfg, dir, files, summary);
    else if (experiment == "toys")
      code = run_toys(cfg, dir, files, summary);
    else if (experiment == "calibrate")
      code = run_calibrate(cfg, dir, files, summary);
    else
      throw ConfigError("unknown experiment '" + experiment + "'");
  } catch (const ConfigError& e) {
    error = e.what();
    code = 2;
  } catch (const std::exception& e) {
    error = e.what();
    code = 4;
  }
  if (!error.empty()) std::fprintf(stderr, "error: %s\n", error.c_str());
  if (dir.empty()) return code;  // nothing was emitted

  json manifest;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["experiment"] = experiment;
  manifest["status"] = code == 0 ? "ok" : "failed";
  manifest["exit_code"] = code;
  if (!error.empty()) manifest["error"] = error;
  manifest["config"] = {{"seed", cfg.seed},
                        {"trials", cfg.trials},
                        {"jobs", cfg.jobs},
                        {"window_halfwidth", effective_window(cfg)},
                        {"grid_spacing", cfg.grid_spacing},
                        {"const_c", cfg.const_c},
                        {"rho_threshold", cfg.rho_threshold},
                        {"kernel_radius", cfg.kernel_radius},
                        {"truncation_tol", cfg.truncation_tol},
                        {"output_dir", dir.string()}};
  manifest["summary"] = summary;
  manifest["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  json flist = json::array();
  for (const FileRecord& f : files)
    flist.push_back({{"name", f.name}, {"bytes", f.bytes}, {"fnv1a64", f.hash}});
  manifest["files"] = flist;
  try {
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (code == 0) code = 4;
  }
  return code;
}

}  // namespace cazp::cli
