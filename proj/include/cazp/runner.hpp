#pragma once
// Experiment driver behind the command-line tool: one validated
// configuration struct, a flat key=value config-file loader, and run(),
// which executes a named experiment into an output directory. Every run
// emits CSV artifacts plus a single manifest.json recording the config, the
// artifact version, the wall time, and a content hash of every emitted
// file. For a fixed (config, artifact version) the CSV bytes are identical
// across runs and across --jobs settings; trial work is farmed to a worker
// pool but rows are flushed in trial order from per-trial buffers.

#include <cstdint>
#include <string>

namespace cazp::cli {

// Bumped whenever any emitted CSV schema or row semantics change.
inline constexpr const char* kArtifactVersion = "cazplab-1";

// Default output directory when neither --out nor output_dir is given.
inline constexpr const char* kOutputDirEnvVar = "CAZPLAB_OUT";

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int trials = 1;
  int jobs = 1;                    // worker threads for trial-level work
  double window_halfwidth = 0.0;   // 0 means the default 8 sqrt(pi)
  double grid_spacing = 0.1;
  double const_c = 16.0;           // floor constant of the envelope R
  double rho_threshold = 5.0;      // admissibility cap of the matching
  double kernel_radius = 1.0;
  double truncation_tol = 1e-12;
  std::string output_dir;          // empty: env var, then current directory
};

// The halfwidth actually used: the stored value, or 8 sqrt(pi) when unset.
double effective_window(const ExperimentConfig& cfg);

// Throws ConfigError naming the offending key. Positivity for every scalar,
// window_halfwidth >= 4 sqrt(pi) (when set), trials >= 1, jobs >= 1.
void validate_config(const ExperimentConfig& cfg);

// Sets one field by key name; numeric parsing errors and unknown keys throw
// ConfigError carrying `where` (e.g. "config.txt:7") for the message prefix.
void set_config_key(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value, const std::string& where);

// Flat key=value file ('#' comments, blank lines ignored) applied on top of
// `base`. Errors are line-precise.
ExperimentConfig load_config_file(const std::string& path,
                                  const ExperimentConfig& base);

// Executes one experiment; returns the process exit code:
//   0 success, 2 configuration error, 3 verification failure,
//   4 numerical failure.
// Experiments and their artifacts (all under cfg.output_dir):
//   sample    zeros.csv                 zeros of one field per trial
//   verify    verify.csv                count/mass comparison reports over
//                                       random cell sets, exit 3 on any fail
//   match     displacements.csv,        lattice matching of both matchers,
//             tails.csv                 tail fits of |xi| when >= 1000 rows
//   basins    basins.csv                gradient-descent basin statistics
//   toys      variance.csv, slopes.csv  variance scaling of the three models
//   calibrate calibrate.csv             ascending const_c scan {4,9,16,25,
//                                       36}, stops at the first value whose
//                                       comparisons all pass, exit 3 if none
// A failed trial still flushes completed rows followed by a FAILED marker
// row, then the manifest, before the nonzero return.
int run(const std::string& experiment, const ExperimentConfig& cfg);

}  // namespace cazp::cli
