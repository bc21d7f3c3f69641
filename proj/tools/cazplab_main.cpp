// Command-line front end: flag parsing and config-file merging only; all
// experiment logic lives in the library so tests can drive it in-process.

#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "cazp/common.hpp"
#include "cazp/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cazplab: zeros of a Gaussian entire function as a randomly "
               "perturbed lattice"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  cazp::cli::ExperimentConfig cfg;
  app.add_option("--config", config_path, "flat key=value config file");
  auto* o_seed = app.add_option("--seed", cfg.seed, "base RNG seed");
  auto* o_trials = app.add_option("--trials", cfg.trials, "number of trials");
  auto* o_window =
      app.add_option("--window", cfg.window_halfwidth,
                     "window halfwidth (default 8 sqrt(pi))");
  auto* o_grid = app.add_option("--grid", cfg.grid_spacing, "grid spacing");
  auto* o_cc = app.add_option("--const-c", cfg.const_c,
                              "floor constant of the envelope field");
  auto* o_thr = app.add_option("--threshold", cfg.rho_threshold,
                               "matching admissibility threshold");
  auto* o_out = app.add_option("--out", cfg.output_dir, "output directory");
  auto* o_jobs = app.add_option("--jobs", cfg.jobs, "worker threads");

  app.add_subcommand("sample", "zeros of one sampled field per trial");
  app.add_subcommand("verify", "count/mass comparisons over random cell sets");
  app.add_subcommand("match", "lattice matching and displacement tails");
  app.add_subcommand("basins", "gradient-descent basin statistics");
  app.add_subcommand("toys", "variance scaling of the three point processes");
  app.add_subcommand("calibrate", "ascending floor-constant scan");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int r = app.exit(e);
    return r == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) {
      // Flags override file values: reload the file as the base, then
      // re-apply every flag the user actually passed.
      cazp::cli::ExperimentConfig merged =
          cazp::cli::load_config_file(config_path, cazp::cli::ExperimentConfig{});
      if (o_seed->count()) merged.seed = cfg.seed;
      if (o_trials->count()) merged.trials = cfg.trials;
      if (o_window->count()) merged.window_halfwidth = cfg.window_halfwidth;
      if (o_grid->count()) merged.grid_spacing = cfg.grid_spacing;
      if (o_cc->count()) merged.const_c = cfg.const_c;
      if (o_thr->count()) merged.rho_threshold = cfg.rho_threshold;
      if (o_out->count()) merged.output_dir = cfg.output_dir;
      if (o_jobs->count()) merged.jobs = cfg.jobs;
      cfg = merged;
    }
  } catch (const cazp::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  return cazp::cli::run(experiment, cfg);
}
