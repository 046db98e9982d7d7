#pragma once

#include "plume/eval/sweep.hpp"
#include "plume/sim/calibrate.hpp"
#include "plume/sim/scene.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace plume::eval {

/// The full desk-scale experiment: scenes, plumes, detection, calibration,
/// identifier and sweep grids, all driven by one master seed.
struct ExperimentConfig {
  std::uint64_t seed = 7;
  sim::SceneConfig scene;  ///< seed is replaced per scenario
  sim::PlumeConfig plume;  ///< source, direction and seed are drawn per scenario
  double far = 0.005;
  int min_roi_size = 9;
  sim::CalibrationConfig calibration;  ///< target_tpr and seed are set per calibration
  std::vector<std::string> gases{"SF6", "N2O", "SO2", "NH3"};
  std::vector<double> strengths{0.1, 0.3, 0.5, 0.8};
  int scene_seeds = 4;
  IdentifierSettings identifier;
  std::optional<double> h_minima;
  std::vector<bg::Method> methods;
  MethodGrids grids;

  /// Defaults used by `report` with no config file. KMeans uses a geometric
  /// subset of 2-128 to fit the runtime budget; the other grids are full.
  static ExperimentConfig defaults();

  /// Strict parse: unknown keys, wrong types and out-of-range values raise
  /// ConfigError. Missing keys keep their defaults.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace plume::eval
