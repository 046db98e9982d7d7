#include "plume/segment/watershed.hpp"

#include "plume/core/error.hpp"
#include "plume/core/stats.hpp"
#include "plume/kernels/kernels.hpp"

#include <array>
#include <limits>
#include <queue>

namespace plume::segment {

namespace {

/// Up, left, right, down: row-major order of the 4-neighbors.
template <typename F>
void for_each_neighbor(int p, int h, int w, F&& f) {
  const int r = p / w;
  const int c = p % w;
  if (r > 0) f(p - w);
  if (c > 0) f(p - 1);
  if (c + 1 < w) f(p + 1);
  if (r + 1 < h) f(p + w);
}

struct Entry {
  double level;
  /// Squared spectral distance to the pixel that queued this entry (0 without
  /// spectra). Within one level, close spectral matches flood first.
  double distance;
  int pixel;
  int label;
};

struct EntryAfter {
  bool operator()(const Entry& a, const Entry& b) const {
    if (a.level != b.level) return a.level > b.level;
    if (a.distance != b.distance) return a.distance > b.distance;
    if (a.pixel != b.pixel) return a.pixel > b.pixel;
    return a.label > b.label;
  }
};

void check_gradient(const ScalarMap& g) {
  if (g.height < 1 || g.width < 1 || g.values.size() != static_cast<std::size_t>(g.size())) {
    throw DomainError("gradient map has invalid dimensions");
  }
  for (double v : g.values) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("gradient values must be finite and non-negative");
  }
}

double sq_distance(const RadianceCube& cube, int a, int b) { return (cube.spectrum(a) - cube.spectrum(b)).squaredNorm(); }

}  // namespace

std::vector<std::vector<int>> SegmentMap::members() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(segment_count));
  for (std::size_t p = 0; p < labels.size(); ++p) out[static_cast<std::size_t>(labels[p])].push_back(static_cast<int>(p));
  return out;
}

ScalarMap spectral_gradient(const RadianceCube& cube) {
  ScalarMap g(cube.height(), cube.width());
  kernels::spectral_gradient(cube, g.values);
  return g;
}

double default_h(const ScalarMap& gradient) {
  std::vector<double> positive;
  for (double v : gradient.values) {
    if (v > 0.0) positive.push_back(v);
  }
  return positive.empty() ? 0.0 : quantile(std::move(positive), 0.25);
}

ScalarMap h_minima(const ScalarMap& gradient, double h) {
  check_gradient(gradient);
  if (!(h >= 0.0)) throw DomainError("h must be non-negative");
  const int n = gradient.size();
  // r(p) = min over q and 4-paths q -> p of max(g(q) + h, max of g along the
  // path): a minimax shortest path, solved Dijkstra-style.
  ScalarMap r(gradient.height, gradient.width, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (int p = 0; p < n; ++p) {
    r.values[static_cast<std::size_t>(p)] = gradient.values[static_cast<std::size_t>(p)] + h;
    queue.emplace(r.values[static_cast<std::size_t>(p)], p);
  }
  while (!queue.empty()) {
    const auto [level, p] = queue.top();
    queue.pop();
    if (level > r.values[static_cast<std::size_t>(p)]) continue;
    for_each_neighbor(p, gradient.height, gradient.width, [&](int q) {
      const double cand = std::max(level, gradient.values[static_cast<std::size_t>(q)]);
      if (cand < r.values[static_cast<std::size_t>(q)]) {
        r.values[static_cast<std::size_t>(q)] = cand;
        queue.emplace(cand, q);
      }
    });
  }
  return r;
}

SegmentMap watershed(const ScalarMap& gradient, double h, const RadianceCube* spectra) {
  const ScalarMap filled = h_minima(gradient, h);
  const int height = gradient.height;
  const int width = gradient.width;
  const int n = gradient.size();
  if (spectra && (spectra->height() != height || spectra->width() != width)) {
    throw DomainError("tie-break cube does not match the gradient map");
  }

  // Regional minima of the filled map: 4-connected plateaus with no lower neighbor.
  SegmentMap seg{height, width, std::vector<int>(static_cast<std::size_t>(n), -1), 0};
  std::vector<char> visited(static_cast<std::size_t>(n), 0);
  std::vector<int> plateau;
  std::vector<int> stack;
  for (int start = 0; start < n; ++start) {
    if (visited[static_cast<std::size_t>(start)]) continue;
    const double level = filled.values[static_cast<std::size_t>(start)];
    plateau.clear();
    stack.assign(1, start);
    visited[static_cast<std::size_t>(start)] = 1;
    bool is_minimum = true;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      plateau.push_back(p);
      for_each_neighbor(p, height, width, [&](int q) {
        const double v = filled.values[static_cast<std::size_t>(q)];
        if (v < level) {
          is_minimum = false;
        } else if (v == level && !visited[static_cast<std::size_t>(q)]) {
          visited[static_cast<std::size_t>(q)] = 1;
          stack.push_back(q);
        }
      });
    }
    if (is_minimum) {
      for (int p : plateau) seg.labels[static_cast<std::size_t>(p)] = seg.segment_count;
      ++seg.segment_count;
    }
  }

  std::priority_queue<Entry, std::vector<Entry>, EntryAfter> queue;
  auto push_neighbors = [&](int p, double level) {
    for_each_neighbor(p, height, width, [&](int q) {
      if (seg.labels[static_cast<std::size_t>(q)] < 0) {
        queue.push({std::max(level, gradient.values[static_cast<std::size_t>(q)]),
                    spectra ? sq_distance(*spectra, p, q) : 0.0, q, seg.labels[static_cast<std::size_t>(p)]});
      }
    });
  };
  for (int p = 0; p < n; ++p) {
    if (seg.labels[static_cast<std::size_t>(p)] >= 0) push_neighbors(p, gradient.values[static_cast<std::size_t>(p)]);
  }
  while (!queue.empty()) {
    const Entry e = queue.top();
    queue.pop();
    if (seg.labels[static_cast<std::size_t>(e.pixel)] >= 0) continue;
    int label = e.label;
    if (spectra) {
      double best = std::numeric_limits<double>::infinity();
      for_each_neighbor(e.pixel, height, width, [&](int q) {
        const int lq = seg.labels[static_cast<std::size_t>(q)];
        if (lq < 0) return;
        const double d = sq_distance(*spectra, e.pixel, q);
        if (d < best || (d == best && lq == e.label)) {
          best = d;
          label = lq;
        }
      });
    }
    seg.labels[static_cast<std::size_t>(e.pixel)] = label;
    push_neighbors(e.pixel, e.level);
  }
  return seg;
}

SegmentMap segment_cube(const RadianceCube& cube, std::optional<double> h) {
  const ScalarMap g = spectral_gradient(cube);
  return watershed(g, h.value_or(default_h(g)), &cube);
}

}  // namespace plume::segment
