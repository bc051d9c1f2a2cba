#pragma once

// Experiment orchestration: presets for each figure, JSON experiment files,
// sweeps and hashed manifests.
//
// Output layout for an experiment with id `X` under an output root `R`:
//   R/X/manifest.json      config snapshot, file inventory with SHA-256, summary
//   R/X/summary.csv        one numeric row per PDE run
//   R/X/run<i>_diagnostics.csv, R/X/run<i>_<snapshot>.csv
//   R/X/profile_fits.csv   (when profile fits are requested)
//   R/X/reduced_run<i>.csv, R/X/comparison.csv        (reduced_vs_pde)
//   R/X/kappa.csv, R/X/trajectory_q<q>.csv            (kappa_table)

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsdamp/solver.hpp"

namespace nlsdamp::runner {

using Json = nlohmann::json;

/// Environment variable naming the output root; "nlsdamp_out" when unset.
inline constexpr const char* kOutputRootEnv = "NLSDAMP_OUTPUT_ROOT";

const char* tool_version();

enum class ExperimentKind { PdeSeries, ReducedVsPde, KappaTable };
const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct PdeRunSpec {
  std::string label;
  SolverConfig solver;
};

struct AnalysisSpec {
  bool asymmetry = false;                  // arrested runs only
  double asymmetry_window_fraction = 0.01;
  bool profile_fits = false;               // every snapshot against R (and Q when p > 5)
  double profile_window = 3.0;
  std::vector<std::string> rate_models;    // delta = 0 runs: "sqrt", "sqrt_free", "loglog"
  double rate_min_focus = 10.0;
};

struct ReducedComparisonSpec {
  double tol = 1e-10;
  double pre_L_floor = 1e-2;      // pre-arrest comparison stops once L falls below this
  double post_L_fraction = 0.5;   // post-arrest comparison stops once L regrows to this * L(0)
};

struct KappaSpec {
  int d = 1;
  std::vector<double> q_values;
  std::vector<double> deltas;          // strictly decreasing extrapolation ladder
  double tol = 1e-10;
  double trajectory_delta = 0.0;
  std::vector<double> trajectory_q;
  double trajectory_T_c = 1.0;
  double trajectory_t_end = 3.0;
};

struct ExperimentConfig {
  std::string id;
  ExperimentKind kind = ExperimentKind::PdeSeries;
  std::string description;
  std::vector<std::string> desk_scale_overrides;
  std::vector<PdeRunSpec> runs;  // PdeSeries and ReducedVsPde
  AnalysisSpec analysis;
  ReducedComparisonSpec reduced;  // ReducedVsPde
  KappaSpec kappa;                // KappaTable
};

/// Every key is required and unknown keys are rejected; errors name the key path.
ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

const std::vector<std::string>& preset_names();
/// Throws ValidationError for unknown names.
ExperimentConfig preset(const std::string& name);

/// Preset name or path to a JSON experiment file.
ExperimentConfig resolve_experiment(const std::string& name_or_path);

std::filesystem::path default_output_root();

struct ManifestRef {
  std::filesystem::path path;  // .../manifest.json
  Json manifest;
};

/// Runs the pipeline, writes data and manifest, then verifies every hash.
/// ValidationError and NumericalError from downstream code are rethrown with
/// the experiment and run named.
ManifestRef run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_root);

/// Shorthand for run_experiment(preset(name), output_root).
ManifestRef run_preset(const std::string& name, const std::filesystem::path& output_root);

/// Throws IoError when a listed file is missing or its hash differs.
void verify_manifest(const std::filesystem::path& manifest_path);

struct SweepItem {
  double value = 0.0;
  bool ok = false;
  int error_code = 0;  // 2 validation, 3 numerical, 4 io, 1 other
  std::string error;
  std::filesystem::path manifest_path;
};

/// One experiment per value, `parameter` applied to every run's solver config
/// (dotted paths such as "initial_condition.amplitude"), or to the kappa block
/// with a "kappa." prefix. Items come back in the order of `values` regardless
/// of scheduling; a failing item does not stop the others.
std::vector<SweepItem> sweep(const ExperimentConfig& base, const std::string& parameter,
                             const std::vector<double>& values, int parallelism,
                             const std::filesystem::path& output_root);

/// Recomputes the analysis from the files a manifest lists (after verifying them).
Json analyze(const std::filesystem::path& manifest_path);

/// Writes a standalone artifact: "ground_state" {d, p}, "q_profile" {p},
/// "reduced_trajectory" {q, delta, T_c, t_end} or "kappa_table" {d, q_values, deltas}.
void export_artifact(const std::string& what, const Json& params, const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
/// Lowercase hex SHA-256 of a string.
std::string sha256_string(const std::string& bytes);

}  // namespace nlsdamp::runner
