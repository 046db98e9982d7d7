#include "plume/core/stats.hpp"

#include "plume/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace plume {

Spectrum mean_spectrum(const RadianceCube& cube, std::span<const int> pixel_indices) {
  if (pixel_indices.empty()) throw DomainError("mean of an empty pixel set");
  Spectrum sum = Spectrum::Zero(cube.bands());
  for (int p : pixel_indices) sum += cube.spectrum(p);
  return sum / static_cast<double>(pixel_indices.size());
}

Spectrum mean_spectrum(const RadianceCube& cube, const PixelMask& mask) {
  if (mask.height() != cube.height() || mask.width() != cube.width()) {
    throw DomainError("mask does not match cube dimensions");
  }
  const std::vector<int> idx = mask.indices();
  return mean_spectrum(cube, idx);
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw DomainError("mean of an empty set");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile of an empty set");
  std::sort(values.begin(), values.end());
  q = std::clamp(q, 0.0, 1.0);
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace plume
