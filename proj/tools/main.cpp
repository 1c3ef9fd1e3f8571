#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wgqst/experiments.hpp"

namespace {

int exit_code(const std::exception& e) {
  using namespace wgqst;
  if (dynamic_cast<const UsageError*>(&e)) return 2;
  if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const NonInvertibleError*>(&e)) return 3;
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-qubit state transfer through a dispersion-engineered chiral waveguide"};
  app.set_version_flag("--version", std::string(wgqst::version()));
  app.require_subcommand(1);

  std::string config;
  std::string out;
  int threads = 1;
  long long seed = -1;

  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config,--config", config, "Config file")->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory (overrides the config)");
  run->add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Seed (overrides the config)")->check(CLI::NonNegativeNumber);

  auto* list = app.add_subcommand("list-experiments", "List the available experiments");

  std::string vconfig;
  auto* validate = app.add_subcommand("validate", "Parse and check a config without running it");
  validate->add_option("config", vconfig, "Config file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*list) {
      for (const auto& name : wgqst::experiment_names())
        std::cout << name << "  " << wgqst::experiment_summary(name) << "\n";
      return 0;
    }
    if (*validate) {
      const auto spec = wgqst::parse_config(vconfig);
      std::cout << wgqst::spec_to_json(spec) << "\n";
      return 0;
    }
    if (config.empty()) throw wgqst::UsageError("run: a config file is required");
    auto spec = wgqst::parse_config(config);
    if (!out.empty()) spec.output = out;
    if (seed >= 0) spec.seed = static_cast<unsigned>(seed);
    for (const auto& f : wgqst::run_experiment(spec, {threads})) std::cout << f.string() << "\n";
    return 0;
  } catch (const wgqst::ConfigError& e) {
    std::cerr << "config error";
    if (!e.key().empty()) std::cerr << " at '" << e.key() << "'";
    std::cerr << ": " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  }
}
