#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP implementation used by
// the library and a `_serial` reference kept for equivalence tests and the
// benchmark. OpenMP variants write disjoint outputs or reduce over fixed-size
// blocks in block order, so results do not depend on the thread count.

#include "plume/core/types.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace plume::kernels {

/// Worker count used by OpenMP regions. `requested <= 0` selects all cores.
void set_worker_count(int requested);
int worker_count();

struct Moments {
  Eigen::VectorXd mean;
  /// Unbiased sample covariance (divides by n - 1).
  Eigen::MatrixXd covariance;
  int count = 0;
};

/// Mean and covariance over the selected rows of `pixels`.
Moments moments(PixelMatrixView pixels, std::span<const int> rows);
Moments moments_serial(PixelMatrixView pixels, std::span<const int> rows);

/// Squared cosine between W(x - mu) and `whitened_target` for every row of
/// `pixels`. A zero whitened pixel scores 0.
void ace_scores(PixelMatrixView pixels, const Eigen::VectorXd& mu, const Eigen::MatrixXd& inv_sqrt,
                const Eigen::VectorXd& whitened_target, std::span<double> out);
void ace_scores_serial(PixelMatrixView pixels, const Eigen::VectorXd& mu, const Eigen::MatrixXd& inv_sqrt,
                       const Eigen::VectorXd& whitened_target, std::span<double> out);

/// Per pixel: max Euclidean distance to its 4-neighbors' spectra.
void spectral_gradient(const RadianceCube& cube, std::span<double> out);
void spectral_gradient_serial(const RadianceCube& cube, std::span<double> out);

/// Euclidean distances between every row of `a` and every row of `b`.
RowMatrix pairwise_distances(PixelMatrixView a, PixelMatrixView b);
RowMatrix pairwise_distances_serial(PixelMatrixView a, PixelMatrixView b);

struct Neighbor {
  int index = 0;          ///< row of the reference matrix
  double sq_distance = 0; ///< squared Euclidean distance, summed in band order

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Exhaustive k-nearest-neighbor scan. Ordering is (squared distance, index).
std::vector<std::vector<Neighbor>> knn_exhaustive_serial(PixelMatrixView refs, PixelMatrixView queries, int k);

/// Norm-ordered search: candidates are visited by |‖r‖ - ‖q‖| and the scan
/// stops once that lower bound exceeds the current k-th distance; per-candidate
/// sums abandon early. Returns exactly what the exhaustive scan returns.
std::vector<std::vector<Neighbor>> knn_search(PixelMatrixView refs, PixelMatrixView queries, int k);

/// Squared-distance nearest center for every row; ties go to the lower center.
void nearest_center(PixelMatrixView points, const RowMatrix& centers, std::span<int> assignment,
                    std::span<double> sq_distance);
void nearest_center_serial(PixelMatrixView points, const RowMatrix& centers, std::span<int> assignment,
                           std::span<double> sq_distance);

inline PixelMatrixView view(const RowMatrix& m) { return {m.data(), m.rows(), m.cols()}; }

}  // namespace plume::kernels
