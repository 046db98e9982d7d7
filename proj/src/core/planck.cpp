#include "plume/core/planck.hpp"

#include "plume/core/error.hpp"

#include <cmath>

namespace plume {

namespace {
// First and second radiation constants in micrometer units (CODATA 2018).
constexpr double kC1 = 1.191042972e8;   // 2hc^2, W um^4 m^-2 sr^-1
constexpr double kC2 = 1.438776877e4;   // hc/k, um K
}  // namespace

double planck_radiance(double wavelength_um, double temperature_k) {
  if (!(wavelength_um > 0.0) || !(temperature_k > 0.0)) {
    throw DomainError("planck_radiance requires positive wavelength and temperature");
  }
  const double x = kC2 / (wavelength_um * temperature_k);
  if (x > 700.0) return 0.0;
  const double l5 = std::pow(wavelength_um, 5);
  return kC1 / (l5 * std::expm1(x));
}

Spectrum planck_spectrum(const SpectralGrid& grid, double temperature_k) {
  Spectrum out(grid.band_count());
  for (int b = 0; b < grid.band_count(); ++b) out[b] = planck_radiance(grid[b], temperature_k);
  return out;
}

}  // namespace plume
