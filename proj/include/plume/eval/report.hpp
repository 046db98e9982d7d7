#pragma once

#include "plume/eval/config.hpp"
#include "plume/eval/sweep.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace plume::eval {

/// Calibrated ACE detection of one embedded plume: whitening and the FAR
/// threshold both use the truth's non-plume pixels. The ROI is the detection
/// group with the largest overlap with the true plume; groups below
/// `min_size` are used only if no larger group touches the plume.
struct Detection {
  std::optional<PixelMask> roi;
  double tpr = 0.0;
  int detected_pixels = 0;
};
Detection detect_plume(const RadianceCube& cube, const sim::PlumeTruth& truth, const sim::GasSpec& gas, double far,
                       int min_size);

/// Embeds `gas` at `n_c_max` into `scenario` and detects it. Empty when no
/// detection group touches the plume.
struct BuiltCase {
  std::optional<PlumeCase> plume_case;
  Detection detection;
};
BuiltCase build_case(const ExperimentConfig& config, const sim::PlumeScenario& scenario, const sim::GasSpec& gas,
                     double strength, double n_c_max, int seed_index);

/// Case id such as "SF6-t30-s2": gas, target TPR in percent, scenario index.
std::string case_id(const std::string& gas, double strength, int seed_index);

struct CalibrationRow {
  std::string gas;
  double strength = 0.0;
  sim::CalibrationResult result;
};

/// Best responses and sensitivity of one method on one case.
struct MethodOutcome {
  std::optional<double> mse;
  std::string mse_hp;
  double mse_sensitivity = 0.0;
  int mse_missing = 0;
  std::optional<double> confidence;
  std::string confidence_hp;
  double confidence_sensitivity = 0.0;
  int confidence_missing = 0;
  int grid_size = 0;
  /// Hyperparameter value at the best point (k, or KNS min_pixels).
  int mse_k = 0;
  int confidence_k = 0;
};

struct CaseRecord {
  std::string id;
  std::string gas;
  double strength = 0.0;
  int seed_index = 0;
  double n_c_max = 0.0;
  int plume_pixels = 0;
  int roi_pixels = 0;
  int roi_overlap = 0;
  double detection_tpr = 0.0;
  double oracle_confidence = 0.0;
  std::map<bg::Method, MethodOutcome> methods;
};

struct ReportResult {
  std::vector<CalibrationRow> calibrations;
  std::vector<CaseRecord> cases;       ///< sorted by id
  std::vector<std::string> undetected; ///< case ids with no usable ROI
};

using Progress = std::function<void(const std::string&)>;

/// Scene and plume footprint of the experiment's scenario `index`; every gas
/// and strength of that index shares them.
sim::PlumeScenario scenario_for(const ExperimentConfig& config, int index);
/// Seed every calibration of the experiment uses for its trial scenarios.
std::uint64_t calibration_seed(const ExperimentConfig& config);
/// Resolves config gas names against the built-in signatures; unknown names
/// raise ConfigError.
sim::GasSpec config_gas(const ExperimentConfig& config, const std::string& name);

/// Calibrates every gas x strength, simulates scene_seeds plumes per cell,
/// detects ROIs and sweeps every configured method on each case.
ReportResult run_report(const ExperimentConfig& config, const Progress& progress = {});

/// summary.csv, per_gas.csv, per_strength.csv, hyperparams.csv,
/// sensitivity.csv, cases.csv, calibration.csv and SVG distribution plots.
void write_report(const ReportResult& result, const ExperimentConfig& config, const std::filesystem::path& dir);

/// Medians used by the summary, exposed for tests and the acceptance checks.
struct MethodSummary {
  bg::Method method;
  int cases = 0;
  double median_mse = 0.0, mean_mse = 0.0;
  double median_confidence = 0.0, mean_confidence = 0.0;
  double median_mse_improvement = 0.0;    ///< per-plume median of Global/method
  double ratio_of_median_mse = 0.0;       ///< median(Global) / median(method)
  double median_confidence_improvement = 0.0;
  double ratio_of_median_confidence = 0.0;
};
std::vector<MethodSummary> aggregate(const std::vector<CaseRecord>& cases, const std::vector<bg::Method>& methods);

/// Paired values across cases, in case order; cases missing either value are skipped.
struct Paired {
  std::vector<double> a, b;
};
Paired paired_confidence(const std::vector<CaseRecord>& cases, bg::Method a, bg::Method b);
/// Oracle (true L_off) confidence paired with method `b`.
Paired paired_oracle_confidence(const std::vector<CaseRecord>& cases, bg::Method b);

}  // namespace plume::eval
