#pragma once

#include "plume/core/types.hpp"

#include <vector>

namespace plume {

/// Binary dilation with the 3x3 square element, repeated `iterations` times.
/// Pixels outside the image are treated as unset (no wraparound).
PixelMask dilate(const PixelMask& mask, int iterations);

/// dilate(roi, 4) minus roi. Throws DomainError if roi is empty or if
/// roi plus guardrail leaves no background pixels.
PixelMask make_guardrail(const PixelMask& roi);

/// Pixels usable for background fitting: complement of roi, guard and
/// any extra exclusion.
PixelMask background_pool(const PixelMask& roi, const PixelMask& guard);

enum class Connectivity { Four, Eight };

/// Connected components of the set pixels. Labels are assigned in order of
/// each component's first pixel in row-major order; unset pixels get -1.
struct Components {
  std::vector<int> labels;
  int count = 0;
};
Components connected_components(const PixelMask& mask, Connectivity connectivity);

}  // namespace plume
