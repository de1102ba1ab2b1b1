#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hml/functional.hpp"
#include "hml/hurst.hpp"
#include "hml/kernel.hpp"

namespace hml {

/// Configuration or usage problems map to exit code 2 at the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SeriesConfig {
  std::string name = "G";
  std::vector<double> coefficients;
  std::optional<int> declared_rank;
  Centering centering = Centering::None;
};

struct SimulateBlock {
  std::string process = "fbm";  // fbm | hermite | volterra | hou
  long n_steps = 512;
  double dt = 1.0 / 512;
  int paths = 1;
  std::string backend = "auto";  // auto | quadrature | rank_sum
  double history = 50.0;
  int refinement = 1;
  double lambda = 1.0;  // hou relaxation
  double sigma = 1.0;   // hou noise amplitude
  std::string format = "csv";  // csv | binary | both
};

struct FunctionalBlock {
  std::vector<std::string> estimate;  // scaling | kappa | limit_covariance | gaussianity | independence
  double lag_cutoff = 50.0;
  double burn_in = 50.0;
  double dt_cap = 0.05;
};

struct FieldConfig {
  std::string type = "linear";  // linear | sine | compact_polynomial
  double a = 1.0;               // linear slope or sine amplitude
  double frequency = 1.0;
  std::vector<double> coefficients;  // compact polynomial
  double radius = 2.0;
};

struct HomogenizeBlock {
  FieldConfig field;
  double x0 = 1.0;
  double eps = 1e-3;
  long solver_steps = 256;
  int reference_replicas = 2000;
  std::vector<double> kappa_ladder;  // defaults to {1e-2, 3e-3, eps}
  double lambda_cutoff = 60.0;
};

struct VerifyBlock {
  std::string only;
  double scale = 1.0;
};

struct ExperimentConfig {
  std::string kind;  // decompose | simulate | functional | homogenize | verify
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::optional<int> threads;
  std::optional<std::string> out_dir;

  std::optional<double> H;
  std::optional<int> m;
  std::optional<KernelSpec> kernel;
  std::vector<SeriesConfig> series;
  std::vector<double> eps_ladder;
  int replicas = 256;
  std::vector<double> T_grid = {0.0, 0.25, 0.5, 0.75, 1.0};

  int decompose_k = 0;
  SimulateBlock simulate;
  FunctionalBlock functional;
  HomogenizeBlock homogenize;
  VerifyBlock verify;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig parse_config_file(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

struct RunOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> only;  // verify filter
};

/// Executes the configured experiment; outputs land atomically in the run
/// directory together with a manifest. Returns the process exit code
/// (0 success, 1 criterion failure).
int run_experiment(const ExperimentConfig& cfg, const RunOverrides& overrides = {});

/// Merge every summary the manifest lists into report.json (sorted keys).
int emit_report(const std::string& run_dir);

/// Atomic file write: temp file + rename, no partial outputs.
void write_text_atomic(const std::string& dir, const std::string& name, const std::string& text);

std::string library_version();

}  // namespace hml
