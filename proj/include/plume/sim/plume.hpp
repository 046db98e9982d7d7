#pragma once

#include "plume/core/types.hpp"
#include "plume/sim/gas.hpp"
#include "plume/sim/scene.hpp"

#include <cstdint>
#include <string_view>

namespace plume::sim {

/// Pasquill-Gifford stability classes.
enum class Stability { A, B, C, D, E, F };
Stability parse_stability(std::string_view name);
char to_char(Stability s);

struct PlumeConfig {
  Pixel source;
  double wind_speed_m_s = 3.0;
  double wind_direction_rad = 0.0;  ///< 0 points along +col, pi/2 along +row
  double meander_sigma_rad = 0.25;
  Stability stability = Stability::D;
  int steps = 50;
  double pixel_size_m = 30.0;
  double release_height_m = 10.0;
  /// Normalized densities below this are set to zero, bounding the plume footprint.
  double cutoff = 0.1;
  std::uint64_t seed = 0;
};

/// Briggs open-country dispersion coefficients (meters) at downwind distance x.
double sigma_y(Stability s, double x_m);
double sigma_z(Stability s, double x_m);

/// Ground-level Gaussian plume concentration for unit emission, at downwind
/// distance x and crosswind offset y (meters). Zero for x <= 0.
double ground_concentration(Stability s, double wind_speed, double release_height, double x_m, double y_m);

/// Time-averaged ground-level density over `steps` meandering wind directions,
/// rescaled so min == 0 and max == 1.
ScalarMap gaussian_plume(int height, int width, const PlumeConfig& config);

struct PlumeTruth {
  ScalarMap density;
  ScalarMap concentration_pathlength;
  ScalarMap plume_temperature_k;
  RadianceCube l_off_true;
  PixelMask roi_truth;  ///< density > 0
};

/// Embeds a gas plume per L = L_off + n_c alpha tau (B(T_p) - eps B(T_g) - rho L_D)
/// with n_c = d * n_c_max and T_p = T_g - d (T_g - T_min).
/// `l_off_true` is the noiseless background of the scene.
struct EmbeddedPlume {
  RadianceCube cube;
  PlumeTruth truth;
};
EmbeddedPlume embed_plume(const RadianceCube& cube, const SurfaceTruth& surface, const AtmosProfile& atmosphere,
                          const GasSpec& gas, const ScalarMap& density, double n_c_max, double t_min_k);

}  // namespace plume::sim
