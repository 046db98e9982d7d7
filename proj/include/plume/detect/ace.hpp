#pragma once

#include "plume/core/types.hpp"
#include "plume/detect/whitening.hpp"

#include <vector>

namespace plume::detect {

/// Squared cosine between the mean-centered whitened pixel and the whitened
/// target. Zero whitened pixel scores 0; zero whitened target throws.
double ace_score(const WhiteningModel& model, const Eigen::Ref<const Spectrum>& pixel,
                 const Eigen::Ref<const Spectrum>& target);

/// ACE for every pixel of the cube.
ScalarMap ace_map(const WhiteningModel& model, const RadianceCube& cube, const Spectrum& target);

/// (1 - far) quantile of the scores over `background_only` pixels, or over all
/// pixels when no mask is given. Pixels with score strictly greater than the
/// threshold are detections.
double far_threshold(const ScalarMap& scores, double far, const PixelMask* background_only = nullptr);

/// Fraction of masked pixels scoring strictly above `threshold`.
double exceedance_rate(const ScalarMap& scores, double threshold, const PixelMask& mask);

/// Thresholds the score map at `far`, takes 8-connected components of the
/// detections, merges components whose one-step dilations overlap, and drops
/// merged groups smaller than `min_size`. ROIs are ordered by first pixel.
std::vector<PixelMask> build_rois(const ScalarMap& scores, double far, int min_size,
                                  const PixelMask* background_only = nullptr);

/// Same grouping for an explicit threshold.
std::vector<PixelMask> rois_above(const ScalarMap& scores, double threshold, int min_size);

}  // namespace plume::detect
