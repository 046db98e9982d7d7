#include "plume/sim/calibrate.hpp"

#include "plume/core/error.hpp"
#include "plume/core/random.hpp"
#include "plume/detect/ace.hpp"
#include "plume/detect/whitening.hpp"

#include <algorithm>
#include <cmath>

namespace plume::sim {

ScenarioFactory random_plume_factory(SceneConfig scene, PlumeConfig plume) {
  return [scene, plume](std::uint64_t trial_seed) {
    SceneConfig sc = scene;
    sc.seed = derive_seed(trial_seed, 0);
    auto s = std::make_shared<const Scene>(gen_scene(sc));

    Rng rng = make_rng(trial_seed, 1);
    std::uniform_int_distribution<int> row(sc.height * 3 / 10, std::max(sc.height * 3 / 10, sc.height * 7 / 10 - 1));
    std::uniform_int_distribution<int> col(sc.width / 8, std::max(sc.width / 8, sc.width * 3 / 10 - 1));
    std::normal_distribution<double> turn(0.0, 0.3);
    PlumeConfig pc = plume;
    pc.source = {row(rng), col(rng)};
    pc.wind_direction_rad = plume.wind_direction_rad + turn(rng);
    pc.seed = derive_seed(trial_seed, 2);
    return PlumeScenario{s, gaussian_plume(sc.height, sc.width, pc)};
  };
}

double plume_tpr(const RadianceCube& embedded, const PlumeTruth& truth, const GasSpec& gas, double far) {
  if (!truth.roi_truth.any()) throw DomainError("plume has no pixels");
  // Background statistics come from the pixels known to be plume-free, the
  // same population that fixes the threshold. Fitting on all pixels lets a
  // strong plume inflate the covariance along its own signature, which makes
  // TPR non-monotone in strength and breaks the bisection.
  const auto model = detect::WhiteningModel::fit(embedded, &truth.roi_truth);
  const ScalarMap scores = detect::ace_map(model, embedded, gas.absorption);
  const PixelMask background = ~truth.roi_truth;
  const double threshold = detect::far_threshold(scores, far, &background);
  return detect::exceedance_rate(scores, threshold, truth.roi_truth);
}

double mean_tpr(const std::vector<PlumeScenario>& scenarios, const GasSpec& gas, double n_c_max, double t_min_k,
                double far) {
  if (scenarios.empty()) throw DomainError("no calibration scenarios");
  double sum = 0.0;
  for (const auto& sc : scenarios) {
    const Scene& s = *sc.scene;
    const auto emb = embed_plume(s.cube, s.surface, s.atmosphere, gas, sc.density, n_c_max, t_min_k);
    sum += plume_tpr(emb.cube, emb.truth, gas, far);
  }
  return sum / static_cast<double>(scenarios.size());
}

double mean_tpr(const ScenarioFactory& factory, const GasSpec& gas, double n_c_max, double t_min_k, double far,
                const std::vector<std::uint64_t>& seeds) {
  std::vector<PlumeScenario> scenarios;
  scenarios.reserve(seeds.size());
  for (auto seed : seeds) scenarios.push_back(factory(seed));
  return mean_tpr(scenarios, gas, n_c_max, t_min_k, far);
}

std::vector<std::uint64_t> calibration_seeds(const CalibrationConfig& config) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(std::max(config.trials, 0)));
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = derive_seed(config.seed, 5000 + i);
  return seeds;
}

CalibrationResult calibrate_strength(const ScenarioFactory& factory, const GasSpec& gas,
                                     const CalibrationConfig& config) {
  if (!(config.target_tpr > 0.0 && config.target_tpr < 1.0)) throw DomainError("target TPR must lie in (0, 1)");
  if (!(config.far > 0.0 && config.far < 1.0)) throw DomainError("FAR must lie in (0, 1)");
  if (config.trials < 1) throw DomainError("calibration needs at least one trial");
  if (!(config.tolerance > 0.0)) throw DomainError("calibration tolerance must be positive");
  validate(gas);

  std::vector<PlumeScenario> scenarios;
  for (auto seed : calibration_seeds(config)) scenarios.push_back(factory(seed));

  CalibrationResult result;
  auto probe = [&](double log_n) {
    const double n = std::exp(log_n);
    const double tpr = mean_tpr(scenarios, gas, n, config.t_min_k, config.far);
    result.trace.push_back({n, tpr});
    return tpr;
  };
  auto finish = [&] {
    const auto best = std::min_element(result.trace.begin(), result.trace.end(), [&](const auto& a, const auto& b) {
      return std::abs(a.tpr - config.target_tpr) < std::abs(b.tpr - config.target_tpr);
    });
    result.n_c_max = best->n_c_max;
    result.achieved_tpr = best->tpr;
    result.steps = static_cast<int>(result.trace.size());
    return result;
  };
  auto close_enough = [&](double tpr) { return std::abs(tpr - config.target_tpr) <= config.tolerance; };

  // A starting strength that perturbs the strongest band by a few percent of
  // the thermal contrast; the bracket then grows by decades.
  constexpr double kDecade = 2.302585092994046;
  constexpr int kMaxExpansions = 12;
  double lo = std::log(0.05 / gas.nominal_scale());
  double tpr = probe(lo);
  if (close_enough(tpr)) return finish();
  double hi = lo;
  if (tpr < config.target_tpr) {
    int k = 0;
    while (tpr < config.target_tpr) {
      if (++k > kMaxExpansions) throw NumericalError("calibration failed: target TPR not reached by expanding n_c_max");
      lo = hi;
      hi += kDecade;
      tpr = probe(hi);
      if (close_enough(tpr)) return finish();
    }
  } else {
    int k = 0;
    while (tpr >= config.target_tpr) {
      if (++k > kMaxExpansions) throw NumericalError("calibration failed: TPR stays above target when shrinking n_c_max");
      hi = lo;
      lo -= kDecade;
      tpr = probe(lo);
      if (close_enough(tpr)) return finish();
    }
  }
  for (int step = 0; step < config.max_steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    tpr = probe(mid);
    if (close_enough(tpr)) break;
    (tpr < config.target_tpr ? lo : hi) = mid;
  }
  return finish();
}

}  // namespace plume::sim
