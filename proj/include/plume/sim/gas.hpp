#pragma once

#include "plume/core/types.hpp"

#include <string>
#include <vector>

namespace plume::sim {

/// A gas absorption signature, per unit concentration-pathlength.
struct GasSpec {
  std::string name;
  Spectrum absorption;

  double nominal_scale() const { return absorption.maxCoeff(); }
};

/// Throws DomainError unless alpha >= 0 with at least one positive band.
void validate(const GasSpec& gas);

/// Eight synthetic signatures built from Gaussian absorption bands at the
/// main LWIR feature positions of SF6, C2H2, CH4, Freon-11, N2O, SO2,
/// Freon-12 and NH3. Peak absorptions span 1e-6 to 1e-2.
std::vector<GasSpec> builtin_gases(const SpectralGrid& grid);

/// Lookup by name in builtin_gases; throws DomainError when unknown.
GasSpec builtin_gas(const SpectralGrid& grid, const std::string& name);

}  // namespace plume::sim
