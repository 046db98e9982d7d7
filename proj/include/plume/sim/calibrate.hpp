#pragma once

#include "plume/core/types.hpp"
#include "plume/sim/gas.hpp"
#include "plume/sim/plume.hpp"
#include "plume/sim/scene.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace plume::sim {

/// A background scene plus a plume density to embed in it.
struct PlumeScenario {
  std::shared_ptr<const Scene> scene;
  ScalarMap density;
};

/// Produces a fresh scenario for each trial seed.
using ScenarioFactory = std::function<PlumeScenario(std::uint64_t trial_seed)>;

/// Scenes from `scene` and plumes from `plume` with the seeds replaced per
/// trial. The source is drawn uniformly from the left-center of the image
/// and the wind direction is perturbed by N(0, 0.3 rad), so each trial sees
/// a different scene and plume footprint.
ScenarioFactory random_plume_factory(SceneConfig scene, PlumeConfig plume);

/// Fraction of plume pixels (density > 0) whose ACE score exceeds the
/// threshold that yields `far` over the non-plume pixels. Whitening is fit on
/// the non-plume pixels of the embedded cube.
double plume_tpr(const RadianceCube& embedded, const PlumeTruth& truth, const GasSpec& gas, double far);

/// Mean TPR over one scenario per seed.
double mean_tpr(const ScenarioFactory& factory, const GasSpec& gas, double n_c_max, double t_min_k, double far,
                const std::vector<std::uint64_t>& seeds);
double mean_tpr(const std::vector<PlumeScenario>& scenarios, const GasSpec& gas, double n_c_max, double t_min_k,
                double far);

struct CalibrationConfig {
  double target_tpr = 0.5;
  double far = 0.005;
  int trials = 20;
  /// Stop once the trial-mean TPR is within this distance of the target.
  double tolerance = 0.02;
  int max_steps = 30;
  double t_min_k = 280.0;
  std::uint64_t seed = 0;
};

struct CalibrationResult {
  double n_c_max = 0.0;
  double achieved_tpr = 0.0;
  int steps = 0;
  struct Probe {
    double n_c_max;
    double tpr;
  };
  std::vector<Probe> trace;
};

/// Bisection on log(n_c_max) until the trial-mean TPR is within tolerance of
/// the target. The same trial scenarios are used at every probe. The result is
/// the probe closest to the target. Throws NumericalError when no bracketing
/// interval is found.
CalibrationResult calibrate_strength(const ScenarioFactory& factory, const GasSpec& gas,
                                     const CalibrationConfig& config);

/// Trial seeds used by calibrate_strength for a given config.
std::vector<std::uint64_t> calibration_seeds(const CalibrationConfig& config);

}  // namespace plume::sim
