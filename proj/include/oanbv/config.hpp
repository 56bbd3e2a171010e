#pragma once

#include "oanbv/experiments.hpp"

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace oanbv {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a CLI command reads. Serializes to the manifest and parses back
/// from it, so a manifest is itself a runnable config.
struct RunConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out = "out";

  std::vector<ScenarioFamily> families = {ScenarioFamily::indoor, ScenarioFamily::outdoor};
  std::vector<Method> methods = {Method::oa_nbv, Method::volumetric, Method::pred};
  int scenes = 200;

  int sweep_trials = 500;
  double grid_step = 0.1;

  int ablation_seeds = 100;
  int ablation_trials = 10;

  PipelineConfig pipeline;
};

/// Materialized config, every field present.
nlohmann::json config_to_json(const RunConfig& config);

/// Overlays `j` on `base`. Throws ConfigError naming the first unknown or
/// mistyped key (dotted path).
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});

/// Reads a JSON file and overlays it on `base`.
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Throws ConfigError describing the first invalid value.
void validate(const RunConfig& config);

/// "a,b,c" helpers shared with the CLI; throw ConfigError.
std::vector<ScenarioFamily> parse_families(const std::string& list);
std::vector<Method> parse_methods(const std::string& list);
/// "w_v,w_a,w_o".
Weights parse_weights(const std::string& list);

}  // namespace oanbv
