#pragma once

#include "plume/core/random.hpp"
#include "plume/core/types.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace plume::test {

/// i.i.d. N(mean, sd) cube on a uniform grid.
inline RadianceCube gaussian_cube(int h, int w, int bands, std::uint64_t seed, double mean = 5.0, double sd = 1.0) {
  RadianceCube cube(h, w, SpectralGrid::uniform(8.0, 12.0, bands));
  Rng rng(seed);
  std::normal_distribution<double> n(mean, sd);
  for (double& v : cube.data()) v = n(rng);
  return cube;
}

/// Gaussian cube whose bands are mixed by a fixed random matrix, so the
/// covariance is far from diagonal.
inline RadianceCube correlated_cube(int h, int w, int bands, std::uint64_t seed) {
  RadianceCube cube = gaussian_cube(h, w, bands, seed, 0.0, 1.0);
  Rng rng(seed + 1);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd mix(bands, bands);
  for (int i = 0; i < bands; ++i)
    for (int j = 0; j < bands; ++j) mix(i, j) = n(rng) + (i == j ? 2.0 : 0.0);
  for (int p = 0; p < cube.pixel_count(); ++p) {
    const Spectrum x = cube.spectrum(p);
    cube.spectrum(p) = (mix * x).array() + 10.0;
  }
  return cube;
}

inline RadianceCube constant_cube(int h, int w, int bands, double value) {
  RadianceCube cube(h, w, SpectralGrid::uniform(8.0, 12.0, bands));
  for (double& v : cube.data()) v = value;
  return cube;
}

inline PixelMask box_mask(int h, int w, int r0, int c0, int r1, int c1) {
  PixelMask m(h, w);
  for (int r = r0; r < r1; ++r)
    for (int c = c0; c < c1; ++c) m.set(r, c);
  return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("plume_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace plume::test
