#include "plume/detect/ace.hpp"

#include "plume/core/error.hpp"
#include "plume/core/morphology.hpp"
#include "plume/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace plume::detect {

double ace_score(const WhiteningModel& model, const Eigen::Ref<const Spectrum>& pixel,
                 const Eigen::Ref<const Spectrum>& target) {
  const Spectrum t = model.whiten_target(target);
  const double t_sq = t.squaredNorm();
  if (!(t_sq > 0.0)) throw DomainError("whitened target is zero");
  const Spectrum x = model.whiten(pixel);
  const double x_sq = x.squaredNorm();
  if (!(x_sq > 0.0)) return 0.0;
  const double dot = t.dot(x);
  return std::clamp(dot * dot / (t_sq * x_sq), 0.0, 1.0);
}

ScalarMap ace_map(const WhiteningModel& model, const RadianceCube& cube, const Spectrum& target) {
  if (cube.bands() != model.bands() || target.size() != model.bands()) {
    throw DomainError("band count mismatch in ace_map");
  }
  const Spectrum t = model.whiten_target(target);
  if (!(t.squaredNorm() > 0.0)) throw DomainError("whitened target is zero");
  ScalarMap out(cube.height(), cube.width());
  kernels::ace_scores(cube.pixels(), model.mean(), model.inv_sqrt(), t, out.values);
  return out;
}

double far_threshold(const ScalarMap& scores, double far, const PixelMask* background_only) {
  if (!(far > 0.0 && far < 1.0)) throw DomainError("false alarm rate must be in (0, 1)");
  std::vector<double> pool;
  if (background_only != nullptr) {
    if (background_only->height() != scores.height || background_only->width() != scores.width) {
      throw DomainError("background mask does not match score map");
    }
    for (int p : background_only->indices()) pool.push_back(scores.values[static_cast<std::size_t>(p)]);
  } else {
    pool = scores.values;
  }
  if (pool.empty()) throw DomainError("no pixels to set a threshold from");
  std::sort(pool.begin(), pool.end());
  // Largest order statistic leaving at most far * n pixels strictly above it.
  const auto n = pool.size();
  const auto allowed = static_cast<std::size_t>(std::floor(far * static_cast<double>(n)));
  const std::size_t idx = n - 1 - std::min(allowed, n - 1);
  return pool[idx];
}

double exceedance_rate(const ScalarMap& scores, double threshold, const PixelMask& mask) {
  const auto idx = mask.indices();
  if (idx.empty()) throw DomainError("exceedance over an empty mask");
  const auto hits = std::count_if(idx.begin(), idx.end(),
                                  [&](int p) { return scores.values[static_cast<std::size_t>(p)] > threshold; });
  return static_cast<double>(hits) / static_cast<double>(idx.size());
}

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

void unite(std::vector<int>& parent, int a, int b) {
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a == b) return;
  if (a > b) std::swap(a, b);
  parent[static_cast<std::size_t>(b)] = a;
}

}  // namespace

std::vector<PixelMask> rois_above(const ScalarMap& scores, double threshold, int min_size) {
  if (min_size < 1) throw DomainError("minimum ROI size must be positive");
  const int h = scores.height;
  const int w = scores.width;
  PixelMask hits(h, w);
  for (int p = 0; p < scores.size(); ++p) hits.set(p, scores.values[static_cast<std::size_t>(p)] > threshold);
  if (!hits.any()) return {};

  const Components comp = connected_components(hits, Connectivity::Eight);
  std::vector<int> parent(static_cast<std::size_t>(comp.count));
  std::iota(parent.begin(), parent.end(), 0);

  // Two components' one-step dilations overlap iff some pixel lies within
  // Chebyshev distance 1 of both.
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      int first = -1;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr;
          const int cc = c + dc;
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          const int label = comp.labels[static_cast<std::size_t>(rr * w + cc)];
          if (label < 0) continue;
          if (first < 0) {
            first = label;
          } else {
            unite(parent, first, label);
          }
        }
      }
    }
  }

  std::vector<int> group_of(static_cast<std::size_t>(comp.count), -1);
  std::vector<PixelMask> groups;
  for (int p = 0; p < hits.size(); ++p) {
    const int label = comp.labels[static_cast<std::size_t>(p)];
    if (label < 0) continue;
    const int root = find_root(parent, label);
    int& g = group_of[static_cast<std::size_t>(root)];
    if (g < 0) {
      g = static_cast<int>(groups.size());
      groups.emplace_back(h, w);
    }
    groups[static_cast<std::size_t>(g)].set(p);
  }
  std::vector<PixelMask> out;
  for (auto& g : groups) {
    if (g.count() >= min_size) out.push_back(std::move(g));
  }
  return out;
}

std::vector<PixelMask> build_rois(const ScalarMap& scores, double far, int min_size,
                                  const PixelMask* background_only) {
  return rois_above(scores, far_threshold(scores, far, background_only), min_size);
}

}  // namespace plume::detect
