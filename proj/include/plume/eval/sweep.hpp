#pragma once

#include "plume/detect/whitening.hpp"
#include "plume/estimate/estimators.hpp"
#include "plume/eval/metrics.hpp"
#include "plume/identify/identify.hpp"
#include "plume/segment/watershed.hpp"
#include "plume/sim/plume.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace plume::eval {

/// One simulated plume with its detected ROI.
struct PlumeCase {
  std::string id;
  std::string gas;
  double strength = 0.0;  ///< target TPR the plume strength was calibrated to
  std::uint64_t seed = 0;
  double n_c_max = 0.0;
  RadianceCube cube;
  sim::PlumeTruth truth;
  PixelMask roi;
};

struct GridPoint {
  bg::Hyperparams hp;
  std::optional<double> response;  ///< empty when the estimator failed here
  std::string error;
};

struct SweepReport {
  bg::Method method = bg::Method::Global;
  Objective objective = Objective::BgMse;
  std::vector<GridPoint> grid;
  int best = -1;            ///< index into grid, -1 when every point failed
  double sensitivity = 0.0; ///< population STD of the non-missing responses
  int missing = 0;

  bool has_best() const noexcept { return best >= 0; }
  const GridPoint& best_point() const;
  double best_response() const { return *best_point().response; }
};

/// Fills best (min for MSE, max for confidence, first on ties), sensitivity and missing.
SweepReport summarize(bg::Method method, Objective objective, std::vector<GridPoint> grid);

/// Hyperparameter grids per method.
struct MethodGrids {
  std::vector<int> kmeans;   ///< clusters
  std::vector<int> pca;      ///< components
  std::vector<int> knn;      ///< neighbors
  std::vector<int> annulus;  ///< dilations
  std::vector<int> kns_k;    ///< minimum pixels
  std::vector<bg::Linkage> linkages{bg::Linkage::Single, bg::Linkage::Complete, bg::Linkage::Average};
  std::vector<bool> kns_bts{false, true};
  SignMode sign_mode = SignMode::Absorption;
  std::uint64_t kmeans_seed = 0;

  /// Full ranges: clusters 2-128, components/neighbors/dilations 1-127,
  /// KNS k in {2^2..2^11} x 3 linkages x BTS on/off (60 points).
  static MethodGrids full();
  std::vector<bg::Hyperparams> grid(bg::Method m) const;
};

struct IdentifierSettings {
  double beta = 10.0;
  SignMode sign_mode = SignMode::Absorption;
};

/// Everything one case's sweeps share: the background problem, whitening
/// model, whitened library, segment map and per-method fit caches.
class CaseEvaluator {
 public:
  /// Whitening for identification is fit on the cube excluding ROI and guardrail.
  CaseEvaluator(const PlumeCase& c, const identify::SpectralLibrary& library, IdentifierSettings id,
                std::optional<double> h_minima = std::nullopt);
  ~CaseEvaluator();

  struct Sweeps {
    SweepReport bg_mse;
    SweepReport id_confidence;
  };
  /// Evaluates both objectives from a single estimate per grid point.
  Sweeps sweep(bg::Method method, const std::vector<bg::Hyperparams>& grid);

  /// True-gas confidence of one estimate.
  double confidence(const bg::BackgroundEstimate& e) const;
  /// Confidence with the true L_off as the background of every ROI pixel.
  double oracle_confidence() const;

  const bg::BackgroundProblem& problem() const noexcept { return *problem_; }
  const detect::WhiteningModel& model() const noexcept { return model_; }
  const segment::SegmentMap& segments();

 private:
  bg::BackgroundEstimate run(const bg::Hyperparams& hp);

  const PlumeCase* case_;
  const identify::SpectralLibrary* library_;
  IdentifierSettings id_;
  std::optional<double> h_;
  std::unique_ptr<bg::BackgroundProblem> problem_;
  detect::WhiteningModel model_;
  std::optional<segment::SegmentMap> segments_;
  std::unique_ptr<bg::PcaContext> pca_;
  std::unique_ptr<bg::KnnContext> knn_;
  int knn_max_ = 0;
  std::unique_ptr<bg::KnsContext> kns_;
};

/// Single-objective sweep of one method over one case.
SweepReport grid_sweep(const PlumeCase& c, bg::Method method, Objective objective,
                       const std::vector<bg::Hyperparams>& grid, const identify::SpectralLibrary& library,
                       IdentifierSettings id = {}, std::optional<double> h_minima = std::nullopt);

}  // namespace plume::eval
