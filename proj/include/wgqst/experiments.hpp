#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wgqst/errors.hpp"
#include "wgqst/model.hpp"

namespace wgqst {

/// Bad command line or unknown experiment name.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct GridSettings {
  int modes = 2000;
  double window = 40.0;      // half-width in units of gamma
  double resolution = 0.01;  // time scan step
};

struct OptimizerSettings {
  int max_iters = 40;
  double tolerance = 1e-9;
  double smoothing = 0.0;
  double initial_step = 1.0;
};

struct RampSettings {
  double half_length = 3.0;  // in v_g/gamma
  double homogeneous_window = 320.0;
  double gap = 0.5;
};

struct DispersionChoice {
  std::string kind = "far";  // far | near | linear | corrected | table
  std::optional<double> delta_t;
  std::string table;
};

struct ExperimentSpec {
  std::string name;
  PhysicalParams params = PhysicalParams::standard(5.0);
  GridSettings grid;
  std::vector<double> sweep;
  OptimizerSettings optimizer;
  RampSettings ramp;
  DispersionChoice dispersion;
  std::filesystem::path output = "results";
  unsigned seed = 0;
};

const std::vector<std::string>& experiment_names();
/// One-line description per experiment, for list-experiments.
std::string experiment_summary(const std::string& name);

/// Parses and validates a JSON config; every error names the offending key.
ExperimentSpec parse_config(const std::filesystem::path& path);
ExperimentSpec parse_config_text(const std::string& text);

/// Canonical JSON of a spec (all defaults filled); embedded in every output.
std::string spec_to_json(const ExperimentSpec& spec);

struct RunOptions {
  int threads = 1;
};

/// Runs the experiment and returns the files written under spec.output.
std::vector<std::filesystem::path> run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// Version string embedded in output metadata.
const char* version();

}  // namespace wgqst
