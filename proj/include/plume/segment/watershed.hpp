#pragma once

#include "plume/core/types.hpp"

#include <optional>
#include <vector>

namespace plume::segment {

/// Label per pixel in [0, segment_count); each label's pixels are 4-connected.
struct SegmentMap {
  int height = 0;
  int width = 0;
  std::vector<int> labels;
  int segment_count = 0;

  int operator()(int row, int col) const { return labels[static_cast<std::size_t>(row * width + col)]; }
  /// Pixel indices of every segment, each list in row-major order.
  std::vector<std::vector<int>> members() const;
};

/// Max Euclidean distance from each pixel's spectrum to its 4-neighbors'.
ScalarMap spectral_gradient(const RadianceCube& cube);

/// 25th percentile of the strictly positive gradient values, 0 when there are none.
double default_h(const ScalarMap& gradient);

/// Reconstruction by erosion of (gradient + h) over gradient: every basin
/// shallower than h is filled to its spill level.
ScalarMap h_minima(const ScalarMap& gradient, double h);

/// Marker-based priority flood. Markers are the 4-connected regional minima
/// of h_minima(gradient, h); pixels are flooded in ascending gradient level,
/// equal levels in row-major order.
///
/// A popped pixel takes the label of the entry that reached it. When
/// `spectra` is given, entries of one level pop in order of their spectral
/// distance to the neighbor that queued them, and the popped pixel takes the
/// label of its spectrally closest labeled 4-neighbor. Pixels on a boundary
/// ridge then join the region they belong to rather than the one that
/// happened to arrive first.
SegmentMap watershed(const ScalarMap& gradient, double h, const RadianceCube* spectra = nullptr);

/// spectral_gradient + watershed, with `h` defaulting to default_h.
SegmentMap segment_cube(const RadianceCube& cube, std::optional<double> h = std::nullopt);

}  // namespace plume::segment
