// Python bindings: coarse entry points over the C++ core. Heavy objects
// (fields, metric views, matchings) stay on the C++ side; each function
// builds what it needs from a seed and returns plain arrays and dicts.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "cazp/gef_core.hpp"
#include "cazp/matching.hpp"
#include "cazp/potential_field.hpp"
#include "cazp/rng.hpp"
#include "cazp/runner.hpp"
#include "cazp/special_metric.hpp"
#include "cazp/stats.hpp"
#include "cazp/toy_models.hpp"
#include "cazp/whitney.hpp"
#include "cazp/zero_finder.hpp"

namespace py = pybind11;
using namespace cazp;

namespace {

GridField build_envelope(std::uint64_t seed, std::uint64_t trial,
                         double halfwidth, double const_c, double spacing,
                         double kernel_radius) {
  const double pot_hw = halfwidth + kernel_radius;
  const double sample_r = pot_hw * std::sqrt(2.0) + 3.2;
  const GefSample s = make_sample(substream(seed, trial), sample_r);
  const GridField phi = potential_grid(s, {0.0, 0.0}, pot_hw, spacing);
  const GridField F =
      convolve(absolute_patched(phi).field, make_kernel(spacing, kernel_radius));
  return compute_R(F, const_c);
}

py::array_t<double> field_to_array(const GridField& g) {
  py::array_t<double> a({g.ny, g.nx});
  std::copy(g.values.begin(), g.values.end(), a.mutable_data());
  return a;
}

std::vector<std::complex<double>> zeros_fn(std::uint64_t seed,
                                           double disk_radius,
                                           std::uint64_t trial) {
  const GefSample s = make_sample(substream(seed, trial), disk_radius + 0.8);
  return find_zeros_expanding(s, disk_radius).points;
}

py::dict envelope_fn(std::uint64_t seed, double halfwidth, double const_c,
                     std::uint64_t trial, double spacing,
                     double kernel_radius) {
  const GridField R =
      build_envelope(seed, trial, halfwidth, const_c, spacing, kernel_radius);
  py::dict out;
  out["R"] = field_to_array(R);
  out["origin"] = std::complex<double>(R.origin);
  out["spacing"] = R.spacing;
  return out;
}

py::array_t<double> displacements_fn(std::uint64_t seed,
                                     double window_halfwidth, double const_c,
                                     std::uint64_t trial,
                                     const std::string& matcher,
                                     double threshold) {
  const double kSqrtPi = std::sqrt(M_PI);
  if (window_halfwidth < 4.0 * kSqrtPi)
    throw ConfigError("displacements: window_halfwidth must be >= 4 sqrt(pi)");
  const double pot_hw = window_halfwidth + 1.9 + 1.0;
  const double zeros_disk = window_halfwidth * std::sqrt(2.0) + 0.5;
  const double sample_r =
      std::max(zeros_disk, pot_hw * std::sqrt(2.0) + 3.2);
  const GefSample s = make_sample(substream(seed, trial), sample_r);
  const GridField phi = potential_grid(s, {0.0, 0.0}, pot_hw, 0.1);
  const GridField F =
      convolve(absolute_patched(phi).field, make_kernel(0.1, 1.0));
  const SpecialMetricView view(compute_R(F, const_c));
  const ZeroSet zeros = find_zeros_expanding(s, zeros_disk);
  const Rect win{-window_halfwidth, -window_halfwidth, window_halfwidth,
                 window_halfwidth};
  const LatticeWindow lattice = make_lattice(win, default_buffer(view.R()));
  Matching m;
  if (matcher == "hall")
    m = build_matching(zeros, lattice, view, threshold);
  else if (matcher == "mincost")
    m = min_cost_matching(zeros, lattice, view, threshold);
  else
    throw ConfigError("displacements: matcher must be 'hall' or 'mincost'");
  std::vector<double> xi;
  for (const MatchedPair& p : m.pairs)
    if (p.interior) xi.push_back(std::abs(p.xi));
  py::array_t<double> a(static_cast<py::ssize_t>(xi.size()));
  std::copy(xi.begin(), xi.end(), a.mutable_data());
  return a;
}

py::dict fit_tail_fn(const std::vector<double>& samples) {
  const TailReport r = fit_gaussian_tail(samples);
  py::dict out;
  out["rate"] = r.rate;
  out["rate_lo"] = r.rate_lo;
  out["rate_hi"] = r.rate_hi;
  out["quality"] = r.quality;
  return out;
}

py::dict exp_moment_fn(const std::vector<double>& samples, double eps) {
  const MomentReport r = exp_moment(samples, eps);
  py::dict out;
  out["mean"] = r.mean;
  out["unstable"] = r.unstable;
  return out;
}

py::dict variance_slope_fn(const std::string& model, int trials,
                           std::uint64_t seed) {
  ToyModel m;
  if (model == "gef")
    m = ToyModel::GEF;
  else if (model == "s1_bernoulli")
    m = ToyModel::S1_BERNOULLI;
  else if (model == "s2_gaussian_lattice")
    m = ToyModel::S2_GAUSSIAN_LATTICE;
  else
    throw ConfigError("variance_slope: unknown model " + model);
  const TestFunction h = scaled_support(bump_function(), 3.0);
  const SlopeReport r =
      variance_scaling(m, h, {4.0, 8.0, 16.0, 32.0}, trials, seed);
  py::dict out;
  out["slope"] = r.slope;
  out["ci_lo"] = r.ci_lo;
  out["ci_hi"] = r.ci_hi;
  out["ci_wide"] = r.ci_wide;
  return out;
}

int run_experiment_fn(const std::string& experiment,
                      const std::string& output_dir, std::uint64_t seed,
                      int trials, int jobs, double window_halfwidth,
                      double grid_spacing, double const_c,
                      double rho_threshold) {
  cli::ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.trials = trials;
  cfg.jobs = jobs;
  cfg.window_halfwidth = window_halfwidth;
  cfg.grid_spacing = grid_spacing;
  cfg.const_c = const_c;
  cfg.rho_threshold = rho_threshold;
  cfg.output_dir = output_dir;
  return cli::run(experiment, cfg);
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() =
      "Zeros of a Gaussian entire function as a randomly perturbed lattice: "
      "sampling, envelope metric, matching and experiment drivers.";

  mod.def("zeros", &zeros_fn, py::arg("seed"), py::arg("disk_radius"),
          py::arg("trial") = 0,
          "Zeros of one sampled field inside the given disk, as a list of "
          "complex numbers. Mean count is disk area / pi.");

  mod.def("envelope", &envelope_fn, py::arg("seed"), py::arg("halfwidth"),
          py::arg("const_c") = 16.0, py::arg("trial") = 0,
          py::arg("spacing") = 0.1, py::arg("kernel_radius") = 1.0,
          "Metric envelope R = sqrt(const_c (1 + F)) on a square grid, "
          "where F mollifies the absolute normalized log-modulus. Returns "
          "{'R': 2d array (rows = imaginary axis), 'origin', 'spacing'}.");

  mod.def("displacements", &displacements_fn, py::arg("seed"),
          py::arg("window_halfwidth"), py::arg("const_c") = 16.0,
          py::arg("trial") = 0, py::arg("matcher") = "hall",
          py::arg("threshold") = 5.0,
          "Interior |zero - lattice site| displacements of one trial under "
          "the bounded ('hall') or squared-cost ('mincost') matcher.");

  mod.def("fit_tail", &fit_tail_fn, py::arg("samples"),
          "Weighted fit of survival ~ prefactor * exp(-rate * x^2) with a "
          "bootstrap CI: {'rate', 'rate_lo', 'rate_hi', 'quality'}.");

  mod.def("exp_moment", &exp_moment_fn, py::arg("samples"), py::arg("eps"),
          "Sample mean of exp(eps * x^2) with an instability flag: "
          "{'mean', 'unstable'}.");

  mod.def("variance_slope", &variance_slope_fn, py::arg("model"),
          py::arg("trials") = 200, py::arg("seed") = 1,
          "Log-log variance slope of the scaled linear statistic across "
          "L in {4,8,16,32} for model 'gef', 's1_bernoulli' or "
          "'s2_gaussian_lattice'. Needs trials >= 200.");

  mod.def("run_experiment", &run_experiment_fn, py::arg("experiment"),
          py::arg("output_dir"), py::arg("seed") = 1, py::arg("trials") = 1,
          py::arg("jobs") = 1, py::arg("window_halfwidth") = 0.0,
          py::arg("grid_spacing") = 0.1, py::arg("const_c") = 16.0,
          py::arg("rho_threshold") = 5.0,
          "Run a named experiment (sample, verify, match, basins, toys, "
          "calibrate) into output_dir; returns the process exit code and "
          "writes CSV artifacts plus manifest.json.");

  mod.def("artifact_version", [] { return std::string(cli::kArtifactVersion); },
          "Version tag stamped into every manifest.json.");
}
