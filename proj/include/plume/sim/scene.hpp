#pragma once

#include "plume/core/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace plume::sim {

/// Atmospheric transmission and path radiances, one value per band.
struct AtmosProfile {
  Spectrum transmission;
  Spectrum upwelling;
  Spectrum downwelling;
};

/// Per-pixel surface properties. Reflectance is 1 - emissivity.
struct SurfaceTruth {
  int height = 0;
  int width = 0;
  RowMatrix emissivity;  ///< (H*W) x B
  std::vector<double> temperature_k;
  std::vector<int> material_label;

  Spectrum reflectance(int pixel) const { return Spectrum::Ones(emissivity.cols()) - emissivity.row(pixel).transpose(); }
};

enum class Layout { Rectangles, Voronoi };

/// Throws DomainError for anything other than "rectangles" / "voronoi".
Layout parse_layout(std::string_view name);
std::string to_string(Layout layout);

struct SceneConfig {
  int height = 64;
  int width = 64;
  int bands = 128;
  int material_count = 4;
  Layout layout = Layout::Voronoi;
  /// Spatial regions before material assignment; 0 picks 2 * material_count.
  int region_count = 0;
  /// Standard deviation of additive Gaussian sensor noise, radiance units.
  double noise_level = 0.02;
  /// Peak deviation of the smooth temperature field around each material's
  /// base temperature, at most 3 K.
  double temperature_amplitude_k = 2.0;
  double atmosphere_temperature_k = 290.0;
  std::uint64_t seed = 0;
};

struct Scene {
  RadianceCube cube;   ///< observed radiance, with noise
  RadianceCube l_off;  ///< noiseless off-plume radiance
  SurfaceTruth surface;
  AtmosProfile atmosphere;
};

/// Synthetic LWIR scene from the off-plume transfer equation
/// L_off = L_U + tau (eps B(T_g) + rho L_D), plus sensor noise.
Scene gen_scene(const SceneConfig& config);

/// Noiseless off-plume radiance for the given truth.
RadianceCube render_off_plume(const SurfaceTruth& surface, const AtmosProfile& atmosphere, const SpectralGrid& grid);

/// Smooth transmission curve in [0.7, 0.95] with path radiances of an
/// effective atmosphere at `temperature_k`.
AtmosProfile default_atmosphere(const SpectralGrid& grid, double temperature_k = 290.0);

/// `count` emissivity curves in [0.7, 1.0]: six fixed shapes, then seeded
/// random parametric curves.
std::vector<Spectrum> material_emissivities(const SpectralGrid& grid, int count, std::uint64_t seed);

}  // namespace plume::sim
