#include "plume/eval/sweep.hpp"

#include "plume/core/error.hpp"
#include "plume/core/morphology.hpp"
#include "plume/core/stats.hpp"

#include <algorithm>

namespace plume::eval {

const GridPoint& SweepReport::best_point() const {
  if (!has_best()) throw DomainError("sweep has no successful grid point");
  return grid[static_cast<std::size_t>(best)];
}

SweepReport summarize(bg::Method method, Objective objective, std::vector<GridPoint> grid) {
  if (grid.empty()) throw DomainError("sweep grid is empty");
  SweepReport r;
  r.method = method;
  r.objective = objective;
  r.grid = std::move(grid);
  std::vector<double> ok;
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    const auto& v = r.grid[i].response;
    if (!v) {
      ++r.missing;
      continue;
    }
    ok.push_back(*v);
    if (r.best < 0) {
      r.best = static_cast<int>(i);
      continue;
    }
    const double cur = *r.grid[static_cast<std::size_t>(r.best)].response;
    if (objective == Objective::BgMse ? *v < cur : *v > cur) r.best = static_cast<int>(i);
  }
  r.sensitivity = stddev(ok);
  return r;
}

MethodGrids MethodGrids::full() {
  MethodGrids g;
  for (int k = 2; k <= 128; ++k) g.kmeans.push_back(k);
  for (int k = 1; k <= 127; ++k) {
    g.pca.push_back(k);
    g.knn.push_back(k);
    g.annulus.push_back(k);
  }
  for (int n = 2; n <= 11; ++n) g.kns_k.push_back(1 << n);
  return g;
}

std::vector<bg::Hyperparams> MethodGrids::grid(bg::Method m) const {
  using bg::Hyperparams;
  std::vector<Hyperparams> out;
  auto ints = [&](const std::vector<int>& ks) {
    for (int k : ks) out.push_back(Hyperparams::of(m, k, m == bg::Method::KMeans ? kmeans_seed : 0));
  };
  switch (m) {
    case bg::Method::Global: out.push_back(Hyperparams::of(m)); break;
    case bg::Method::KMeans: ints(kmeans); break;
    case bg::Method::PCA: ints(pca); break;
    case bg::Method::KNN: ints(knn); break;
    case bg::Method::Annulus: ints(annulus); break;
    case bg::Method::KNS:
      for (int k : kns_k) {
        for (auto l : linkages) {
          for (bool b : kns_bts) out.push_back(Hyperparams::of(bg::KnsParams{k, l, b, sign_mode}));
        }
      }
      break;
  }
  return out;
}

CaseEvaluator::CaseEvaluator(const PlumeCase& c, const identify::SpectralLibrary& library, IdentifierSettings id,
                             std::optional<double> h_minima)
    : case_(&c), library_(&library), id_(id), h_(h_minima) {
  library.index_of(c.gas);
  problem_ = std::make_unique<bg::BackgroundProblem>(bg::BackgroundProblem::with_guardrail(c.cube, c.roi));
  const PixelMask excluded = problem_->roi() | problem_->guard();
  model_ = detect::WhiteningModel::fit(c.cube, &excluded);
}

CaseEvaluator::~CaseEvaluator() = default;

const segment::SegmentMap& CaseEvaluator::segments() {
  if (!segments_) segments_ = segment::segment_cube(case_->cube, h_);
  return *segments_;
}

bg::BackgroundEstimate CaseEvaluator::run(const bg::Hyperparams& hp) {
  switch (hp.method) {
    case bg::Method::PCA:
      if (!pca_) pca_ = std::make_unique<bg::PcaContext>(*problem_);
      return pca_->estimate(hp.k);
    case bg::Method::KNN:
      if (!knn_ || hp.k > knn_max_) throw DomainError("KNN context not prepared for k=" + std::to_string(hp.k));
      return knn_->estimate(hp.k);
    case bg::Method::KNS:
      if (!kns_) kns_ = std::make_unique<bg::KnsContext>(*problem_, segments());
      return kns_->estimate(hp.kns);
    default: return bg::estimate(*problem_, hp);
  }
}

double CaseEvaluator::confidence(const bg::BackgroundEstimate& e) const {
  const Spectrum sp = identify::whitened_superpixel(model_, case_->cube, e);
  return identify::identify(sp, *library_, model_, id_.beta, id_.sign_mode).confidence_of(case_->gas);
}

double CaseEvaluator::oracle_confidence() const {
  bg::BackgroundEstimate e;
  e.roi_pixels = problem_->roi_pixels();
  e.width = case_->cube.width();
  e.backgrounds = case_->truth.l_off_true.gather(e.roi_pixels);
  return confidence(e);
}

CaseEvaluator::Sweeps CaseEvaluator::sweep(bg::Method method, const std::vector<bg::Hyperparams>& grid) {
  if (method == bg::Method::KNN) {
    int kmax = 0;
    for (const auto& hp : grid) kmax = std::max(kmax, hp.k);
    kmax = std::min<int>(kmax, static_cast<int>(problem_->pool_pixels().size()));
    if (kmax >= 1 && (!knn_ || kmax > knn_max_)) {
      knn_ = std::make_unique<bg::KnnContext>(*problem_, kmax);
      knn_max_ = kmax;
    }
  }
  std::vector<GridPoint> mse, conf;
  for (const auto& hp : grid) {
    if (hp.method != method) throw DomainError("grid point belongs to another method");
    GridPoint a{hp, std::nullopt, {}};
    GridPoint b{hp, std::nullopt, {}};
    try {
      const bg::BackgroundEstimate e = run(hp);
      a.response = background_mse(e, case_->truth);
      b.response = confidence(e);
    } catch (const Error& ex) {
      a.error = b.error = ex.what();
    }
    mse.push_back(std::move(a));
    conf.push_back(std::move(b));
  }
  return {summarize(method, Objective::BgMse, std::move(mse)), summarize(method, Objective::IdConfidence, std::move(conf))};
}

SweepReport grid_sweep(const PlumeCase& c, bg::Method method, Objective objective,
                       const std::vector<bg::Hyperparams>& grid, const identify::SpectralLibrary& library,
                       IdentifierSettings id, std::optional<double> h_minima) {
  CaseEvaluator ev(c, library, id, h_minima);
  auto s = ev.sweep(method, grid);
  return objective == Objective::BgMse ? std::move(s.bg_mse) : std::move(s.id_confidence);
}

}  // namespace plume::eval
