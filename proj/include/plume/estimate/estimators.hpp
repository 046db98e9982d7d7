#pragma once

#include "plume/core/types.hpp"
#include "plume/segment/watershed.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace plume::bg {

enum class Method { Global, KMeans, PCA, KNN, Annulus, KNS };
std::string to_string(Method m);
/// Case-insensitive; throws ConfigError for unknown names.
Method parse_method(std::string_view name);
const std::vector<Method>& all_methods();

enum class Linkage { Single, Complete, Average };
std::string to_string(Linkage l);
Linkage parse_linkage(std::string_view name);
std::string to_string(SignMode s);
SignMode parse_sign_mode(std::string_view name);

struct KnsParams {
  int min_pixels = 64;
  Linkage linkage = Linkage::Average;
  bool use_bts = false;
  SignMode sign_mode = SignMode::Absorption;

  friend bool operator==(const KnsParams&, const KnsParams&) = default;
};

/// One point in a method's hyperparameter space. `k` is the cluster count
/// (KMeans), component count (PCA), neighbor count (KNN) or dilation count
/// (Annulus); Global ignores it and KNS reads `kns`.
struct Hyperparams {
  Method method = Method::Global;
  int k = 0;
  KnsParams kns;
  std::uint64_t seed = 0;

  static Hyperparams of(Method m, int k = 0, std::uint64_t seed = 0) {
    Hyperparams hp;
    hp.method = m;
    hp.k = k;
    hp.seed = seed;
    return hp;
  }
  static Hyperparams of(const KnsParams& kns) {
    Hyperparams hp = of(Method::KNS, kns.min_pixels);
    hp.kns = kns;
    return hp;
  }

  /// Short human-readable form, e.g. "k=8" or "k=64,linkage=average,bts=on".
  std::string label() const;
  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// A ROI with its guardrail and the background-fitting population N.
class BackgroundProblem {
 public:
  /// N = complement of (roi | guard | exclude). Throws DomainError on an
  /// empty ROI, mismatched shapes, or an empty N.
  BackgroundProblem(const RadianceCube& cube, PixelMask roi, PixelMask guard, const PixelMask* exclude = nullptr);
  /// Guardrail from make_guardrail(roi).
  static BackgroundProblem with_guardrail(const RadianceCube& cube, const PixelMask& roi,
                                          const PixelMask* exclude = nullptr);

  const RadianceCube& cube() const noexcept { return *cube_; }
  const PixelMask& roi() const noexcept { return roi_; }
  const PixelMask& guard() const noexcept { return guard_; }
  const PixelMask& pool() const noexcept { return pool_; }
  /// ROI and N pixel indices, row-major.
  const std::vector<int>& roi_pixels() const noexcept { return roi_pixels_; }
  const std::vector<int>& pool_pixels() const noexcept { return pool_pixels_; }
  /// Spectra of N, one row per pool pixel in pool_pixels() order.
  const RowMatrix& pool_spectra() const noexcept { return pool_spectra_; }
  const RowMatrix& roi_spectra() const noexcept { return roi_spectra_; }

 private:
  const RadianceCube* cube_;
  PixelMask roi_, guard_, pool_;
  std::vector<int> roi_pixels_, pool_pixels_;
  RowMatrix roi_spectra_, pool_spectra_;
};

struct BackgroundEstimate {
  std::vector<int> roi_pixels;  ///< row-major pixel indices
  RowMatrix backgrounds;        ///< one row per roi pixel
  Hyperparams hyperparams;
  int width = 0;                ///< image width, for row/col conversion

  Method method() const noexcept { return hyperparams.method; }
  Pixel pixel(std::size_t i) const { return {roi_pixels[i] / width, roi_pixels[i] % width}; }
};

BackgroundEstimate estimate_global(const BackgroundProblem& p);
/// k-means++ seeding, at most 100 Lloyd iterations, stop when the Frobenius
/// norm of the center shift is <= 1e-6 of the centers' norm.
BackgroundEstimate estimate_kmeans(const BackgroundProblem& p, int clusters, std::uint64_t seed);
BackgroundEstimate estimate_pca(const BackgroundProblem& p, int components);
BackgroundEstimate estimate_knn(const BackgroundProblem& p, int neighbors);
BackgroundEstimate estimate_annulus(const BackgroundProblem& p, int dilations);
BackgroundEstimate estimate_kns(const BackgroundProblem& p, const segment::SegmentMap& segments, const KnsParams& params);

/// Dispatch on hp.method; `segments` is required for KNS.
BackgroundEstimate estimate(const BackgroundProblem& p, const Hyperparams& hp,
                            const segment::SegmentMap* segments = nullptr);

/// Pairwise Euclidean linkage between two non-empty spectra sets.
double linkage_distance(const RowMatrix& a, const RowMatrix& b, Linkage kind);

/// K-means result on N, exposed for tests.
struct KMeansFit {
  RowMatrix centers;
  std::vector<int> assignment;
  int iterations = 0;
};
KMeansFit kmeans_fit(const RowMatrix& data, int clusters, std::uint64_t seed);

/// Reusable fits shared across one method's hyperparameter grid.
class PcaContext {
 public:
  explicit PcaContext(const BackgroundProblem& p);
  BackgroundEstimate estimate(int components) const;
  /// Mean squared reconstruction error of the N pixels with `components` components.
  double training_error(int components) const;
  int max_components() const;

 private:
  const BackgroundProblem* p_;
  Spectrum mean_;
  Eigen::MatrixXd basis_;  ///< columns by descending eigenvalue
  Eigen::MatrixXd roi_coeff_, pool_coeff_;
};

class KnnContext {
 public:
  KnnContext(const BackgroundProblem& p, int max_neighbors);
  BackgroundEstimate estimate(int neighbors) const;

 private:
  const BackgroundProblem* p_;
  int max_k_;
  std::vector<std::vector<int>> neighbors_;  ///< pool rows per ROI pixel, nearest first
};

class KnsContext {
 public:
  KnsContext(const BackgroundProblem& p, const segment::SegmentMap& segments);
  BackgroundEstimate estimate(const KnsParams& params);

  /// Segment labels intersecting the ROI and labels with any N pixel.
  const std::vector<int>& roi_segments() const noexcept { return roi_segments_; }
  const std::vector<int>& pool_segments() const noexcept { return pool_segments_; }
  /// Labels chosen for ROI segment `s` under the given parameters.
  std::vector<int> selection(int roi_segment, const KnsParams& params) const;

 private:
  const BackgroundProblem* p_;
  std::vector<int> roi_segments_, pool_segments_;
  std::vector<std::vector<int>> roi_rows_;    ///< per ROI segment: rows of roi_spectra
  std::vector<std::vector<int>> pool_rows_;   ///< per pool segment: rows of pool_spectra
  /// distance_[linkage][roi segment][pool segment]
  std::vector<std::vector<std::vector<double>>> distance_;
  std::map<std::pair<int, std::vector<int>>, Spectrum> mean_cache_;
  std::map<std::tuple<int, std::vector<int>, int>, Spectrum> bts_cache_;

  int roi_index(int label) const;
};

/// CSV with header row,col,b0..b{B-1}, plus a JSON sidecar at
/// `<csv path>.json` holding the method and hyperparameters.
void write_estimate(const BackgroundEstimate& e, const std::filesystem::path& csv_path);
BackgroundEstimate read_estimate(const std::filesystem::path& csv_path, int width);

}  // namespace plume::bg
