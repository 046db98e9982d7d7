#include "plume/sim/plume.hpp"

#include "plume/core/error.hpp"
#include "plume/core/planck.hpp"
#include "plume/core/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace plume::sim {

namespace {

struct Briggs {
  double ay;          // sigma_y = ay x (1 + 1e-4 x)^-1/2
  double az, bz, pz;  // sigma_z = az x (1 + bz x)^pz
};

Briggs briggs(Stability s) {
  switch (s) {
    case Stability::A: return {0.22, 0.20, 0.0, 0.0};
    case Stability::B: return {0.16, 0.12, 0.0, 0.0};
    case Stability::C: return {0.11, 0.08, 2e-4, -0.5};
    case Stability::D: return {0.08, 0.06, 1.5e-3, -0.5};
    case Stability::E: return {0.06, 0.03, 3e-4, -1.0};
    case Stability::F: return {0.04, 0.016, 3e-4, -1.0};
  }
  throw DomainError("invalid stability class");
}

}  // namespace

Stability parse_stability(std::string_view name) {
  if (name.size() == 1) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    if (c >= 'A' && c <= 'F') return static_cast<Stability>(c - 'A');
  }
  throw DomainError("invalid stability class '" + std::string(name) + "' (expected A-F)");
}

char to_char(Stability s) { return static_cast<char>('A' + static_cast<int>(s)); }

double sigma_y(Stability s, double x_m) {
  const Briggs b = briggs(s);
  return b.ay * x_m / std::sqrt(1.0 + 1e-4 * x_m);
}

double sigma_z(Stability s, double x_m) {
  const Briggs b = briggs(s);
  return b.az * x_m * std::pow(1.0 + b.bz * x_m, b.pz);
}

double ground_concentration(Stability s, double wind_speed, double release_height, double x_m, double y_m) {
  if (x_m <= 0.0) return 0.0;
  const double sy = sigma_y(s, x_m);
  const double sz = sigma_z(s, x_m);
  // Ground reflection doubles the direct term, cancelling the 1/2 of the
  // bivariate normal normalization.
  return std::exp(-0.5 * y_m * y_m / (sy * sy)) * std::exp(-0.5 * release_height * release_height / (sz * sz)) /
         (std::numbers::pi * wind_speed * sy * sz);
}

ScalarMap gaussian_plume(int height, int width, const PlumeConfig& config) {
  if (height < 1 || width < 1) throw DomainError("plume map dimensions must be positive");
  if (config.steps < 1) throw DomainError("plume steps must be >= 1");
  if (!(config.wind_speed_m_s > 0.0)) throw DomainError("wind speed must be positive");
  if (config.meander_sigma_rad < 0.0) throw DomainError("meander sigma must be non-negative");
  if (!(config.pixel_size_m > 0.0)) throw DomainError("pixel size must be positive");
  if (config.release_height_m < 0.0) throw DomainError("release height must be non-negative");
  if (config.cutoff < 0.0 || config.cutoff >= 1.0) throw DomainError("plume cutoff must be in [0, 1)");
  const Pixel src = config.source;
  if (src.row < 0 || src.row >= height || src.col < 0 || src.col >= width) {
    throw DomainError("plume source lies outside the image");
  }

  Rng rng = make_rng(config.seed, 11);
  std::vector<double> directions(static_cast<std::size_t>(config.steps), config.wind_direction_rad);
  if (config.meander_sigma_rad > 0.0) {
    std::normal_distribution<double> meander(config.wind_direction_rad, config.meander_sigma_rad);
    for (double& d : directions) d = meander(rng);
  }

  ScalarMap d(height, width);
  for (double theta : directions) {
    const double ux = std::cos(theta);  // column component
    const double uy = std::sin(theta);  // row component
    for (int r = 0; r < height; ++r) {
      const double dy = (r - src.row) * config.pixel_size_m;
      for (int c = 0; c < width; ++c) {
        const double dx = (c - src.col) * config.pixel_size_m;
        const double along = dx * ux + dy * uy;
        const double cross = -dx * uy + dy * ux;
        d(r, c) += ground_concentration(config.stability, config.wind_speed_m_s, config.release_height_m, along, cross);
      }
    }
  }
  const auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
  const double min_v = *lo;
  const double span = *hi - min_v;
  if (!(span > 0.0)) throw DomainError("plume does not reach any pixel of the image");
  for (double& v : d.values) {
    v = (v - min_v) / span;
    if (v < config.cutoff) v = 0.0;
  }
  return d;
}

EmbeddedPlume embed_plume(const RadianceCube& cube, const SurfaceTruth& surface, const AtmosProfile& atmosphere,
                          const GasSpec& gas, const ScalarMap& density, double n_c_max, double t_min_k) {
  if (!(n_c_max > 0.0)) throw DomainError("n_c_max must be positive");
  if (!(t_min_k > 0.0)) throw DomainError("plume minimum temperature must be positive");
  validate(gas);
  const int bands = cube.bands();
  if (density.height != cube.height() || density.width != cube.width() || surface.height != cube.height() ||
      surface.width != cube.width() || gas.absorption.size() != bands || surface.emissivity.cols() != bands ||
      atmosphere.transmission.size() != bands) {
    throw DomainError("embed_plume inputs have inconsistent dimensions");
  }
  for (double v : density.values) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("plume density must lie in [0, 1]");
  }

  EmbeddedPlume out{cube, {}};
  PlumeTruth& truth = out.truth;
  truth.density = density;
  truth.concentration_pathlength = ScalarMap(cube.height(), cube.width());
  truth.plume_temperature_k = ScalarMap(cube.height(), cube.width());
  truth.l_off_true = render_off_plume(surface, atmosphere, cube.grid());
  truth.roi_truth = PixelMask(cube.height(), cube.width());

  const SpectralGrid& grid = cube.grid();
  for (int p = 0; p < cube.pixel_count(); ++p) {
    const double d = density.values[static_cast<std::size_t>(p)];
    const double tg = surface.temperature_k[static_cast<std::size_t>(p)];
    const double tp = tg - d * (tg - t_min_k);
    truth.plume_temperature_k.values[static_cast<std::size_t>(p)] = tp;
    if (d <= 0.0) continue;
    const double nc = d * n_c_max;
    truth.concentration_pathlength.values[static_cast<std::size_t>(p)] = nc;
    truth.roi_truth.set(p);
    auto dst = out.cube.spectrum(p);
    for (int b = 0; b < bands; ++b) {
      const double eps = surface.emissivity(p, b);
      const double contrast = planck_radiance(grid[b], tp) - eps * planck_radiance(grid[b], tg) -
                              (1.0 - eps) * atmosphere.downwelling[b];
      dst[b] += nc * gas.absorption[b] * atmosphere.transmission[b] * contrast;
    }
  }
  return out;
}

}  // namespace plume::sim
