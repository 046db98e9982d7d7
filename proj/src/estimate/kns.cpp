#include "plume/bts/bts.hpp"
#include "plume/core/error.hpp"
#include "plume/core/stats.hpp"
#include "plume/estimate/estimators.hpp"
#include "plume/kernels/kernels.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace plume::bg {

KnsContext::KnsContext(const BackgroundProblem& p, const segment::SegmentMap& segments) : p_(&p) {
  const RadianceCube& cube = p.cube();
  if (segments.height != cube.height() || segments.width != cube.width() ||
      segments.labels.size() != static_cast<std::size_t>(cube.pixel_count())) {
    throw DomainError("segment map does not match the cube");
  }
  const int count = segments.segment_count;
  std::vector<std::vector<int>> roi_rows(static_cast<std::size_t>(count));
  std::vector<std::vector<int>> pool_rows(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < p.roi_pixels().size(); ++i) {
    const int label = segments.labels[static_cast<std::size_t>(p.roi_pixels()[i])];
    roi_rows[static_cast<std::size_t>(label)].push_back(static_cast<int>(i));
  }
  for (std::size_t i = 0; i < p.pool_pixels().size(); ++i) {
    const int label = segments.labels[static_cast<std::size_t>(p.pool_pixels()[i])];
    pool_rows[static_cast<std::size_t>(label)].push_back(static_cast<int>(i));
  }
  for (int s = 0; s < count; ++s) {
    if (!roi_rows[static_cast<std::size_t>(s)].empty()) {
      roi_segments_.push_back(s);
      roi_rows_.push_back(std::move(roi_rows[static_cast<std::size_t>(s)]));
    }
    if (!pool_rows[static_cast<std::size_t>(s)].empty()) {
      pool_segments_.push_back(s);
      pool_rows_.push_back(std::move(pool_rows[static_cast<std::size_t>(s)]));
    }
  }
  if (pool_segments_.empty()) throw DomainError("no segment has background pixels");

  // One distance matrix between ROI and N pixels serves all three linkages.
  const RowMatrix d = kernels::pairwise_distances(kernels::view(p.roi_spectra()), kernels::view(p.pool_spectra()));
  distance_.assign(3, std::vector<std::vector<double>>(roi_segments_.size(), std::vector<double>(pool_segments_.size())));
  for (std::size_t a = 0; a < roi_segments_.size(); ++a) {
    for (std::size_t b = 0; b < pool_segments_.size(); ++b) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      double sum = 0.0;
      for (int i : roi_rows_[a]) {
        for (int j : pool_rows_[b]) {
          const double v = d(i, j);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
          sum += v;
        }
      }
      distance_[static_cast<std::size_t>(Linkage::Single)][a][b] = lo;
      distance_[static_cast<std::size_t>(Linkage::Complete)][a][b] = hi;
      distance_[static_cast<std::size_t>(Linkage::Average)][a][b] =
          sum / static_cast<double>(roi_rows_[a].size() * pool_rows_[b].size());
    }
  }
}

int KnsContext::roi_index(int label) const {
  const auto it = std::lower_bound(roi_segments_.begin(), roi_segments_.end(), label);
  if (it == roi_segments_.end() || *it != label) throw DomainError("segment does not intersect the ROI");
  return static_cast<int>(it - roi_segments_.begin());
}

std::vector<int> KnsContext::selection(int roi_segment, const KnsParams& params) const {
  if (params.min_pixels < 1) throw DomainError("KNS needs min_pixels >= 1");
  const auto a = static_cast<std::size_t>(roi_index(roi_segment));
  const auto& dist = distance_[static_cast<std::size_t>(params.linkage)][a];
  std::vector<std::size_t> order(pool_segments_.size());
  std::iota(order.begin(), order.end(), 0);
  // pool_segments_ is ascending, so index order is label order for ties.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return dist[x] < dist[y]; });
  std::vector<int> chosen;
  std::size_t pixels = 0;
  for (std::size_t b : order) {
    chosen.push_back(static_cast<int>(b));
    pixels += pool_rows_[b].size();
    if (pixels >= static_cast<std::size_t>(params.min_pixels)) break;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

BackgroundEstimate KnsContext::estimate(const KnsParams& params) {
  const BackgroundProblem& p = *p_;
  BackgroundEstimate e;
  e.roi_pixels = p.roi_pixels();
  e.width = p.cube().width();
  e.backgrounds.resize(static_cast<Eigen::Index>(e.roi_pixels.size()), p.cube().bands());
  e.hyperparams = Hyperparams::of(params);

  const int mode = params.sign_mode == SignMode::Emission ? 0 : 1;
  std::vector<std::vector<int>> picks(roi_segments_.size());
  for (std::size_t a = 0; a < roi_segments_.size(); ++a) picks[a] = selection(roi_segments_[a], params);

  auto pool_indices = [&](const std::vector<int>& sel) {
    std::vector<int> idx;
    for (int b : sel) {
      for (int r : pool_rows_[static_cast<std::size_t>(b)]) idx.push_back(p.pool_pixels()[static_cast<std::size_t>(r)]);
    }
    std::sort(idx.begin(), idx.end());
    return idx;
  };

  // Solve every uncached ROI segment; solves are independent.
  std::vector<std::size_t> todo;
  for (std::size_t a = 0; a < roi_segments_.size(); ++a) {
    const bool cached = params.use_bts ? bts_cache_.count({static_cast<int>(a), picks[a], mode}) > 0
                                       : mean_cache_.count({static_cast<int>(a), picks[a]}) > 0;
    if (!cached) todo.push_back(a);
  }
  std::vector<Spectrum> solved(todo.size());
  std::vector<std::string> failures(todo.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < todo.size(); ++t) {
    const std::size_t a = todo[t];
    const std::vector<int> idx = pool_indices(picks[a]);
    try {
      if (!params.use_bts) {
        solved[t] = mean_spectrum(p.cube(), idx);
      } else {
        bts::BtsProblem problem;
        problem.clean = p.cube().gather(idx);
        std::vector<int> rows;
        for (int r : roi_rows_[a]) rows.push_back(p.roi_pixels()[static_cast<std::size_t>(r)]);
        problem.contaminated = p.cube().gather(rows);
        problem.sign_mode = params.sign_mode;
        solved[t] = bts::solve_bts(problem).l_off;
      }
    } catch (const std::exception& ex) {
      failures[t] = ex.what();
    }
  }
  for (std::size_t t = 0; t < todo.size(); ++t) {
    if (!failures[t].empty()) throw NumericalError("KNS segment solve failed: " + failures[t]);
    const auto a = static_cast<int>(todo[t]);
    if (params.use_bts) {
      bts_cache_[{a, picks[todo[t]], mode}] = std::move(solved[t]);
    } else {
      mean_cache_[{a, picks[todo[t]]}] = std::move(solved[t]);
    }
  }

  for (std::size_t a = 0; a < roi_segments_.size(); ++a) {
    const Spectrum& bg = params.use_bts ? bts_cache_.at({static_cast<int>(a), picks[a], mode})
                                        : mean_cache_.at({static_cast<int>(a), picks[a]});
    for (int r : roi_rows_[a]) e.backgrounds.row(r) = bg.transpose();
  }
  return e;
}

}  // namespace plume::bg
