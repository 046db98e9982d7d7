#include "plume/kernels/kernels.hpp"

#include "plume/core/error.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace plume::kernels {

namespace {

constexpr int kMomentBlock = 256;
constexpr int kCenterBlock = 256;

int clamp_workers(int requested) {
  const int procs = std::max(1, omp_get_num_procs());
  return requested <= 0 ? procs : requested;
}

/// Scalar squared distance summed in band order. Both KNN paths use this so
/// their distances are bit-identical.
inline double sq_dist(const double* a, const double* b, int bands) {
  double s = 0.0;
  for (int j = 0; j < bands; ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

/// Same sum, abandoned as soon as it exceeds `limit`. Returns +inf when abandoned.
inline double sq_dist_bounded(const double* a, const double* b, int bands, double limit) {
  double s = 0.0;
  for (int j = 0; j < bands; ++j) {
    const double d = a[j] - b[j];
    s += d * d;
    if (s > limit) return std::numeric_limits<double>::infinity();
  }
  return s;
}

inline bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  return a.sq_distance < b.sq_distance || (a.sq_distance == b.sq_distance && a.index < b.index);
}

/// Sorted bounded list of the k best neighbors.
class BestK {
 public:
  explicit BestK(int k) : k_(static_cast<std::size_t>(k)) { items_.reserve(k_ + 1); }

  bool full() const { return items_.size() == k_; }
  double worst() const {
    return full() ? items_.back().sq_distance : std::numeric_limits<double>::infinity();
  }

  void offer(const Neighbor& n) {
    if (full() && !neighbor_less(n, items_.back())) return;
    auto it = std::upper_bound(items_.begin(), items_.end(), n, neighbor_less);
    items_.insert(it, n);
    if (items_.size() > k_) items_.pop_back();
  }

  std::vector<Neighbor> take() { return std::move(items_); }

 private:
  std::size_t k_;
  std::vector<Neighbor> items_;
};

void check_knn_args(PixelMatrixView refs, PixelMatrixView queries, int k) {
  if (k < 1) throw DomainError("k must be at least 1");
  if (refs.rows() < k) throw DomainError("fewer reference pixels than k");
  if (refs.cols() != queries.cols()) throw DomainError("band count mismatch in neighbor search");
}

}  // namespace

void set_worker_count(int requested) { omp_set_num_threads(clamp_workers(requested)); }

int worker_count() { return omp_get_max_threads(); }

Moments moments_serial(PixelMatrixView pixels, std::span<const int> rows) {
  const int n = static_cast<int>(rows.size());
  const auto bands = pixels.cols();
  if (n < 2) throw DomainError("covariance needs at least two pixels");
  Moments m;
  m.count = n;
  m.mean = Eigen::VectorXd::Zero(bands);
  for (int r : rows) m.mean += pixels.row(r).transpose();
  m.mean /= n;
  m.covariance = Eigen::MatrixXd::Zero(bands, bands);
  for (int r : rows) {
    const Eigen::VectorXd d = pixels.row(r).transpose() - m.mean;
    m.covariance.noalias() += d * d.transpose();
  }
  m.covariance /= (n - 1);
  return m;
}

Moments moments(PixelMatrixView pixels, std::span<const int> rows) {
  const int n = static_cast<int>(rows.size());
  const auto bands = pixels.cols();
  if (n < 2) throw DomainError("covariance needs at least two pixels");
  const int blocks = (n + kMomentBlock - 1) / kMomentBlock;

  std::vector<Eigen::VectorXd> partial_sum(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (int blk = 0; blk < blocks; ++blk) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(bands);
    const int end = std::min(n, (blk + 1) * kMomentBlock);
    for (int i = blk * kMomentBlock; i < end; ++i) s += pixels.row(rows[static_cast<std::size_t>(i)]).transpose();
    partial_sum[static_cast<std::size_t>(blk)] = std::move(s);
  }
  Moments m;
  m.count = n;
  m.mean = Eigen::VectorXd::Zero(bands);
  for (const auto& s : partial_sum) m.mean += s;
  m.mean /= n;

  std::vector<Eigen::MatrixXd> partial_scatter(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (int blk = 0; blk < blocks; ++blk) {
    const int begin = blk * kMomentBlock;
    const int end = std::min(n, begin + kMomentBlock);
    RowMatrix centered(end - begin, bands);
    for (int i = begin; i < end; ++i) {
      centered.row(i - begin) = pixels.row(rows[static_cast<std::size_t>(i)]) - m.mean.transpose();
    }
    partial_scatter[static_cast<std::size_t>(blk)] = centered.transpose() * centered;
  }
  m.covariance = Eigen::MatrixXd::Zero(bands, bands);
  for (const auto& s : partial_scatter) m.covariance += s;
  m.covariance /= (n - 1);
  m.covariance = 0.5 * (m.covariance + m.covariance.transpose()).eval();
  return m;
}

namespace {
inline double ace_one(const Eigen::VectorXd& whitened, const Eigen::VectorXd& target, double target_sq) {
  const double pix_sq = whitened.squaredNorm();
  if (pix_sq <= 0.0 || target_sq <= 0.0) return 0.0;
  const double dot = target.dot(whitened);
  const double score = (dot * dot) / (target_sq * pix_sq);
  return std::clamp(score, 0.0, 1.0);
}
}  // namespace

void ace_scores_serial(PixelMatrixView pixels, const Eigen::VectorXd& mu, const Eigen::MatrixXd& inv_sqrt,
                       const Eigen::VectorXd& whitened_target, std::span<double> out) {
  const double target_sq = whitened_target.squaredNorm();
  for (Eigen::Index p = 0; p < pixels.rows(); ++p) {
    const Eigen::VectorXd w = inv_sqrt * (pixels.row(p).transpose() - mu);
    out[static_cast<std::size_t>(p)] = ace_one(w, whitened_target, target_sq);
  }
}

void ace_scores(PixelMatrixView pixels, const Eigen::VectorXd& mu, const Eigen::MatrixXd& inv_sqrt,
                const Eigen::VectorXd& whitened_target, std::span<double> out) {
  const double target_sq = whitened_target.squaredNorm();
  const auto n = static_cast<int>(pixels.rows());
  const auto bands = pixels.cols();
  const int blocks = (n + kCenterBlock - 1) / kCenterBlock;
#pragma omp parallel for schedule(static)
  for (int blk = 0; blk < blocks; ++blk) {
    const int begin = blk * kCenterBlock;
    const int end = std::min(n, begin + kCenterBlock);
    RowMatrix centered = pixels.middleRows(begin, end - begin);
    centered.rowwise() -= mu.transpose();
    // inv_sqrt is symmetric, so (W x)^T = x^T W.
    const RowMatrix whitened = centered * inv_sqrt;
    for (int i = begin; i < end; ++i) {
      const Eigen::VectorXd w = whitened.row(i - begin).transpose();
      out[static_cast<std::size_t>(i)] = ace_one(w, whitened_target, target_sq);
    }
  }
  (void)bands;
}

namespace {
template <bool kParallel>
void gradient_impl(const RadianceCube& cube, std::span<double> out) {
  const int h = cube.height();
  const int w = cube.width();
  const int bands = cube.bands();
  const double* data = cube.data().data();
  auto px = [&](int r, int c) { return data + static_cast<std::size_t>(r * w + c) * static_cast<std::size_t>(bands); };
#pragma omp parallel for schedule(static) if (kParallel)
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double best = 0.0;
      const double* self = px(r, c);
      if (r > 0) best = std::max(best, sq_dist(self, px(r - 1, c), bands));
      if (r + 1 < h) best = std::max(best, sq_dist(self, px(r + 1, c), bands));
      if (c > 0) best = std::max(best, sq_dist(self, px(r, c - 1), bands));
      if (c + 1 < w) best = std::max(best, sq_dist(self, px(r, c + 1), bands));
      out[static_cast<std::size_t>(r * w + c)] = std::sqrt(best);
    }
  }
}
}  // namespace

void spectral_gradient_serial(const RadianceCube& cube, std::span<double> out) { gradient_impl<false>(cube, out); }
void spectral_gradient(const RadianceCube& cube, std::span<double> out) { gradient_impl<true>(cube, out); }

RowMatrix pairwise_distances_serial(PixelMatrixView a, PixelMatrixView b) {
  if (a.cols() != b.cols()) throw DomainError("band count mismatch in pairwise distances");
  const auto bands = static_cast<int>(a.cols());
  RowMatrix out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      out(i, j) = std::sqrt(sq_dist(a.row(i).data(), b.row(j).data(), bands));
    }
  }
  return out;
}

RowMatrix pairwise_distances(PixelMatrixView a, PixelMatrixView b) {
  if (a.cols() != b.cols()) throw DomainError("band count mismatch in pairwise distances");
  const auto bands = static_cast<int>(a.cols());
  const auto rows = static_cast<int>(a.rows());
  RowMatrix out(a.rows(), b.rows());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      out(i, j) = std::sqrt(sq_dist(a.row(i).data(), b.row(j).data(), bands));
    }
  }
  return out;
}

std::vector<std::vector<Neighbor>> knn_exhaustive_serial(PixelMatrixView refs, PixelMatrixView queries, int k) {
  check_knn_args(refs, queries, k);
  const auto bands = static_cast<int>(refs.cols());
  std::vector<std::vector<Neighbor>> out(static_cast<std::size_t>(queries.rows()));
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    BestK best(k);
    for (Eigen::Index r = 0; r < refs.rows(); ++r) {
      best.offer({static_cast<int>(r), sq_dist(queries.row(q).data(), refs.row(r).data(), bands)});
    }
    out[static_cast<std::size_t>(q)] = best.take();
  }
  return out;
}

std::vector<std::vector<Neighbor>> knn_search(PixelMatrixView refs, PixelMatrixView queries, int k) {
  check_knn_args(refs, queries, k);
  const auto bands = static_cast<int>(refs.cols());
  const auto n_refs = static_cast<int>(refs.rows());
  const auto n_queries = static_cast<int>(queries.rows());

  std::vector<double> norm(static_cast<std::size_t>(n_refs));
  for (int r = 0; r < n_refs; ++r) norm[static_cast<std::size_t>(r)] = refs.row(r).norm();
  std::vector<int> order(static_cast<std::size_t>(n_refs));
  for (int r = 0; r < n_refs; ++r) order[static_cast<std::size_t>(r)] = r;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return norm[static_cast<std::size_t>(a)] < norm[static_cast<std::size_t>(b)] ||
           (norm[static_cast<std::size_t>(a)] == norm[static_cast<std::size_t>(b)] && a < b);
  });
  std::vector<double> sorted_norm(static_cast<std::size_t>(n_refs));
  for (int i = 0; i < n_refs; ++i) sorted_norm[static_cast<std::size_t>(i)] = norm[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];

  std::vector<std::vector<Neighbor>> out(static_cast<std::size_t>(n_queries));
#pragma omp parallel for schedule(dynamic, 8)
  for (int q = 0; q < n_queries; ++q) {
    const double* qp = queries.row(q).data();
    const double qn = queries.row(q).norm();
    BestK best(k);
    // Two cursors walking outward from the query's norm position.
    int hi = static_cast<int>(std::lower_bound(sorted_norm.begin(), sorted_norm.end(), qn) - sorted_norm.begin());
    int lo = hi - 1;
    while (lo >= 0 || hi < n_refs) {
      const double gap_lo = lo >= 0 ? qn - sorted_norm[static_cast<std::size_t>(lo)] : std::numeric_limits<double>::infinity();
      const double gap_hi = hi < n_refs ? sorted_norm[static_cast<std::size_t>(hi)] - qn : std::numeric_limits<double>::infinity();
      const bool take_lo = gap_lo <= gap_hi;
      const double gap = std::max(0.0, take_lo ? gap_lo : gap_hi);
      // Reverse triangle inequality, shrunk slightly to absorb rounding in the norms.
      const double bound = gap * (1.0 - 1e-9);
      if (best.full() && bound * bound > best.worst()) break;
      const int pos = take_lo ? lo-- : hi++;
      const int r = order[static_cast<std::size_t>(pos)];
      const double limit = best.worst();
      const double d = sq_dist_bounded(qp, refs.row(r).data(), bands, limit);
      if (std::isfinite(d)) best.offer({r, d});
    }
    out[static_cast<std::size_t>(q)] = best.take();
  }
  return out;
}

void nearest_center_serial(PixelMatrixView points, const RowMatrix& centers, std::span<int> assignment,
                           std::span<double> sq_distance) {
  const auto bands = static_cast<int>(points.cols());
  for (Eigen::Index p = 0; p < points.rows(); ++p) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double d = sq_dist(points.row(p).data(), centers.row(c).data(), bands);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    assignment[static_cast<std::size_t>(p)] = best;
    sq_distance[static_cast<std::size_t>(p)] = best_d;
  }
}

void nearest_center(PixelMatrixView points, const RowMatrix& centers, std::span<int> assignment,
                    std::span<double> sq_distance) {
  // Expanded form |x|^2 + |c|^2 - 2 x.c through a blocked matrix product,
  // then refined with the exact band-order sum for the chosen center.
  const auto n = static_cast<int>(points.rows());
  const auto bands = static_cast<int>(points.cols());
  const Eigen::VectorXd center_sq = centers.rowwise().squaredNorm();
  const int blocks = (n + kCenterBlock - 1) / kCenterBlock;
#pragma omp parallel for schedule(static)
  for (int blk = 0; blk < blocks; ++blk) {
    const int begin = blk * kCenterBlock;
    const int end = std::min(n, begin + kCenterBlock);
    const auto block = points.middleRows(begin, end - begin);
    const RowMatrix dots = block * centers.transpose();
    for (int i = begin; i < end; ++i) {
      const double xsq = block.row(i - begin).squaredNorm();
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < centers.rows(); ++c) {
        const double d = xsq + center_sq[c] - 2.0 * dots(i - begin, c);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      assignment[static_cast<std::size_t>(i)] = best;
      sq_distance[static_cast<std::size_t>(i)] = sq_dist(points.row(i).data(), centers.row(best).data(), bands);
    }
  }
}

}  // namespace plume::kernels
