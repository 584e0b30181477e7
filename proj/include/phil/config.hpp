#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "phil/hinf.hpp"
#include "phil/plant.hpp"
#include "phil/sim.hpp"

namespace phil {

struct ValidationSettings {
  double f_max_hz = 1000.0;
  int grid_points = 1000;
};

struct RunConfig {
  PhilScenario scenario;
  ScalingSpec scaling;
  WeightSpec weights;
  Objective objective = Objective::Transparency;
  SynthesisOptions synthesis;
  ValidationSettings validation;
  double itm_filter_cutoff_hz = 150.0;
  std::vector<double> sweep_scr{0.1, 1.0, 2.0, 5.0, 200.0};
  SimOptions sim;
  double settle_fraction = 0.5;
  std::string output_dir = "out";

  void validate() const;
};

/// Unspecified fields keep their defaults. Unknown keys are rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Full config with every field, plus derived quantities (P_rated, R1, L1).
nlohmann::ordered_json config_to_json(const RunConfig& config);

const char* to_string(Objective objective);

}  // namespace phil
