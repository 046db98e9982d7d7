#include "plume/estimate/estimators.hpp"

#include "plume/core/error.hpp"
#include "plume/core/morphology.hpp"
#include "plume/core/random.hpp"
#include "plume/core/stats.hpp"
#include "plume/kernels/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>

namespace plume::bg {

namespace {

BackgroundEstimate uniform_estimate(const BackgroundProblem& p, const Spectrum& bg, Hyperparams hp) {
  BackgroundEstimate e;
  e.roi_pixels = p.roi_pixels();
  e.width = p.cube().width();
  e.backgrounds = bg.transpose().replicate(static_cast<Eigen::Index>(e.roi_pixels.size()), 1);
  e.hyperparams = hp;
  return e;
}

BackgroundEstimate empty_estimate(const BackgroundProblem& p, Hyperparams hp) {
  BackgroundEstimate e;
  e.roi_pixels = p.roi_pixels();
  e.width = p.cube().width();
  e.backgrounds.resize(static_cast<Eigen::Index>(e.roi_pixels.size()), p.cube().bands());
  e.hyperparams = hp;
  return e;
}

}  // namespace

BackgroundEstimate estimate_global(const BackgroundProblem& p) {
  return uniform_estimate(p, mean_spectrum(p.cube(), p.pool_pixels()), Hyperparams::of(Method::Global));
}

KMeansFit kmeans_fit(const RowMatrix& data, int clusters, std::uint64_t seed) {
  const auto n = static_cast<int>(data.rows());
  const auto bands = data.cols();
  if (clusters < 1) throw DomainError("cluster count must be positive");
  if (n < clusters) throw DomainError("fewer background pixels than clusters");
  const auto view = kernels::view(data);

  // k-means++ seeding.
  Rng rng = make_rng(seed, 21);
  KMeansFit fit;
  fit.centers.resize(clusters, bands);
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  int first = std::uniform_int_distribution<int>(0, n - 1)(rng);
  for (int c = 0; c < clusters; ++c) {
    int pick = first;
    if (c > 0) {
      double total = 0.0;
      for (double v : d2) total += v;
      if (total > 0.0) {
        const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
        double acc = 0.0;
        pick = -1;
        for (int i = 0; i < n; ++i) {
          acc += d2[static_cast<std::size_t>(i)];
          if (d2[static_cast<std::size_t>(i)] > 0.0 && acc > u) {
            pick = i;
            break;
          }
        }
        if (pick < 0) {  // rounding at the top end: last point with positive weight
          for (int i = n - 1; i >= 0; --i) {
            if (d2[static_cast<std::size_t>(i)] > 0.0) {
              pick = i;
              break;
            }
          }
        }
      } else {
        pick = static_cast<int>(std::find(chosen.begin(), chosen.end(), 0) - chosen.begin());
      }
    }
    chosen[static_cast<std::size_t>(pick)] = 1;
    fit.centers.row(c) = data.row(pick);
    for (int i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], (data.row(i) - data.row(pick)).squaredNorm());
    }
  }

  // Lloyd iterations.
  constexpr int kMaxIter = 100;
  constexpr double kTol = 1e-6;
  fit.assignment.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> dist(static_cast<std::size_t>(n));
  RowMatrix next(clusters, bands);
  std::vector<int> counts(static_cast<std::size_t>(clusters));
  for (int it = 0; it < kMaxIter; ++it) {
    kernels::nearest_center(view, fit.centers, fit.assignment, dist);
    next.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      const int a = fit.assignment[static_cast<std::size_t>(i)];
      next.row(a) += data.row(i);
      ++counts[static_cast<std::size_t>(a)];
    }
    for (int c = 0; c < clusters; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        next.row(c) /= counts[static_cast<std::size_t>(c)];
      } else {
        // Re-seed an empty cluster at the worst-fit point.
        const auto far = std::max_element(dist.begin(), dist.end()) - dist.begin();
        next.row(c) = data.row(far);
        dist[static_cast<std::size_t>(far)] = 0.0;
      }
    }
    const double shift = (next - fit.centers).norm();
    const double scale = fit.centers.norm();
    fit.centers = next;
    fit.iterations = it + 1;
    if (shift <= kTol * scale) break;
  }
  kernels::nearest_center(view, fit.centers, fit.assignment, dist);
  return fit;
}

BackgroundEstimate estimate_kmeans(const BackgroundProblem& p, int clusters, std::uint64_t seed) {
  if (clusters < 2) throw DomainError("KMeans needs at least 2 clusters");
  const KMeansFit fit = kmeans_fit(p.pool_spectra(), clusters, seed);
  const auto m = static_cast<int>(p.roi_pixels().size());
  std::vector<int> assign(static_cast<std::size_t>(m));
  std::vector<double> dist(static_cast<std::size_t>(m));
  kernels::nearest_center(kernels::view(p.roi_spectra()), fit.centers, assign, dist);
  BackgroundEstimate e = empty_estimate(p, Hyperparams::of(Method::KMeans, clusters, seed));
  for (int i = 0; i < m; ++i) e.backgrounds.row(i) = fit.centers.row(assign[static_cast<std::size_t>(i)]);
  return e;
}

PcaContext::PcaContext(const BackgroundProblem& p) : p_(&p) {
  const RowMatrix& pool = p.pool_spectra();
  std::vector<int> rows(static_cast<std::size_t>(pool.rows()));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  if (pool.rows() < 2) throw DomainError("PCA needs at least 2 background pixels");
  const kernels::Moments m = kernels::moments(kernels::view(pool), rows);
  mean_ = m.mean;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.covariance);
  if (eig.info() != Eigen::Success) throw NumericalError("PCA eigendecomposition failed");
  basis_ = eig.eigenvectors().rowwise().reverse();
  roi_coeff_ = (p.roi_spectra().rowwise() - mean_.transpose()) * basis_;
  pool_coeff_ = (pool.rowwise() - mean_.transpose()) * basis_;
}

int PcaContext::max_components() const {
  return static_cast<int>(std::min<Eigen::Index>(basis_.cols(), p_->pool_spectra().rows() - 1));
}

BackgroundEstimate PcaContext::estimate(int components) const {
  if (components < 1 || components > basis_.cols()) throw DomainError("PCA components must lie in [1, B]");
  if (p_->pool_spectra().rows() <= components) throw DomainError("PCA needs more background pixels than components");
  BackgroundEstimate e = empty_estimate(*p_, Hyperparams::of(Method::PCA, components));
  e.backgrounds = (roi_coeff_.leftCols(components) * basis_.leftCols(components).transpose()).rowwise() +
                  mean_.transpose();
  return e;
}

double PcaContext::training_error(int components) const {
  if (components < 0 || components > basis_.cols()) throw DomainError("PCA components out of range");
  const auto rest = basis_.cols() - components;
  return pool_coeff_.rightCols(rest).rowwise().squaredNorm().mean() / static_cast<double>(basis_.cols());
}

BackgroundEstimate estimate_pca(const BackgroundProblem& p, int components) { return PcaContext(p).estimate(components); }

KnnContext::KnnContext(const BackgroundProblem& p, int max_neighbors) : p_(&p), max_k_(max_neighbors) {
  if (max_neighbors < 1) throw DomainError("KNN needs at least 1 neighbor");
  if (p.pool_spectra().rows() < max_neighbors) throw DomainError("fewer background pixels than neighbors");
  const auto found = kernels::knn_search(kernels::view(p.pool_spectra()), kernels::view(p.roi_spectra()), max_neighbors);
  neighbors_.resize(found.size());
  for (std::size_t i = 0; i < found.size(); ++i) {
    for (const auto& nb : found[i]) neighbors_[i].push_back(nb.index);
  }
}

BackgroundEstimate KnnContext::estimate(int neighbors) const {
  if (neighbors < 1 || neighbors > max_k_) throw DomainError("neighbor count outside the prepared range");
  BackgroundEstimate e = empty_estimate(*p_, Hyperparams::of(Method::KNN, neighbors));
  const RowMatrix& pool = p_->pool_spectra();
  for (std::size_t i = 0; i < neighbors_.size(); ++i) {
    Spectrum acc = Spectrum::Zero(pool.cols());
    for (int j = 0; j < neighbors; ++j) acc += pool.row(neighbors_[i][static_cast<std::size_t>(j)]).transpose();
    e.backgrounds.row(static_cast<Eigen::Index>(i)) = (acc / neighbors).transpose();
  }
  return e;
}

BackgroundEstimate estimate_knn(const BackgroundProblem& p, int neighbors) {
  return KnnContext(p, neighbors).estimate(neighbors);
}

BackgroundEstimate estimate_annulus(const BackgroundProblem& p, int dilations) {
  if (dilations < 1) throw DomainError("annulus needs at least one dilation");
  const PixelMask inner = p.roi() | p.guard();
  const PixelMask ring = (dilate(inner, dilations) - inner) & p.pool();
  if (!ring.any()) throw DomainError("annulus is empty");
  return uniform_estimate(p, mean_spectrum(p.cube(), ring.indices()), Hyperparams::of(Method::Annulus, dilations));
}

double linkage_distance(const RowMatrix& a, const RowMatrix& b, Linkage kind) {
  if (a.rows() == 0 || b.rows() == 0) throw DomainError("linkage needs two non-empty sets");
  const RowMatrix d = kernels::pairwise_distances(kernels::view(a), kernels::view(b));
  switch (kind) {
    case Linkage::Single: return d.minCoeff();
    case Linkage::Complete: return d.maxCoeff();
    case Linkage::Average: return d.mean();
  }
  return 0.0;
}

BackgroundEstimate estimate_kns(const BackgroundProblem& p, const segment::SegmentMap& segments, const KnsParams& params) {
  KnsContext ctx(p, segments);
  return ctx.estimate(params);
}

BackgroundEstimate estimate(const BackgroundProblem& p, const Hyperparams& hp, const segment::SegmentMap* segments) {
  switch (hp.method) {
    case Method::Global: return estimate_global(p);
    case Method::KMeans: return estimate_kmeans(p, hp.k, hp.seed);
    case Method::PCA: return estimate_pca(p, hp.k);
    case Method::KNN: return estimate_knn(p, hp.k);
    case Method::Annulus: return estimate_annulus(p, hp.k);
    case Method::KNS:
      if (!segments) throw DomainError("KNS needs a segment map");
      return estimate_kns(p, *segments, hp.kns);
  }
  throw DomainError("unknown method");
}

}  // namespace plume::bg
