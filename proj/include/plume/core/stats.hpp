#pragma once

#include "plume/core/types.hpp"

#include <span>
#include <vector>

namespace plume {

/// Per-band mean of the masked pixels. Throws DomainError on an empty mask.
Spectrum mean_spectrum(const RadianceCube& cube, const PixelMask& mask);
/// Per-band mean over explicit pixel indices, accumulated in the given order.
Spectrum mean_spectrum(const RadianceCube& cube, std::span<const int> pixel_indices);

double median(std::vector<double> values);
double mean(std::span<const double> values);
/// Population standard deviation (divides by n). Zero for n < 2.
double stddev(std::span<const double> values);
/// Linear-interpolation quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace plume
