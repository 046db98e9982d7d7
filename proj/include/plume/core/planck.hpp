#pragma once

#include "plume/core/types.hpp"

namespace plume {

/// Blackbody spectral radiance in W m^-2 sr^-1 um^-1.
/// Throws DomainError for non-positive wavelength or temperature.
double planck_radiance(double wavelength_um, double temperature_k);

/// planck_radiance evaluated at every band center of `grid`.
Spectrum planck_spectrum(const SpectralGrid& grid, double temperature_k);

}  // namespace plume
