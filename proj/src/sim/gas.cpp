#include "plume/sim/gas.hpp"

#include "plume/core/error.hpp"

#include <cmath>

namespace plume::sim {

namespace {

struct Band {
  double center_um;
  double width_um;
  double relative;  ///< peak relative to the gas's strongest band
};

struct GasShape {
  const char* name;
  double peak;
  std::vector<Band> bands;
};

// Band positions follow the main LWIR features of each molecule; shapes are
// single Gaussians so the signatures stay smooth at any grid resolution.
const std::vector<GasShape>& shapes() {
  static const std::vector<GasShape> s{
      {"SF6", 1e-2, {{10.55, 0.12, 1.0}}},
      {"C2H2", 1e-5, {{7.70, 0.12, 0.6}, {13.00, 0.15, 1.0}}},
      {"CH4", 1e-6, {{7.66, 0.12, 1.0}}},
      {"Freon-11", 1e-3, {{9.22, 0.10, 0.35}, {11.82, 0.15, 1.0}}},
      {"N2O", 1e-5, {{7.78, 0.10, 1.0}, {8.56, 0.08, 0.25}}},
      {"SO2", 1e-4, {{8.68, 0.20, 1.0}, {7.60, 0.10, 0.5}}},
      {"Freon-12", 1e-3, {{10.90, 0.12, 1.0}, {9.15, 0.10, 0.55}, {8.68, 0.08, 0.25}}},
      {"NH3", 1e-4, {{10.35, 0.08, 1.0}, {10.72, 0.08, 0.95}, {9.00, 0.15, 0.2}}},
  };
  return s;
}

}  // namespace

void validate(const GasSpec& gas) {
  if (gas.absorption.size() == 0) throw DomainError("gas '" + gas.name + "' has an empty absorption spectrum");
  if (!gas.absorption.allFinite() || gas.absorption.minCoeff() < 0.0) {
    throw DomainError("gas '" + gas.name + "' absorption must be finite and non-negative");
  }
  if (gas.absorption.maxCoeff() <= 0.0) throw DomainError("gas '" + gas.name + "' has no absorbing band");
}

std::vector<GasSpec> builtin_gases(const SpectralGrid& grid) {
  std::vector<GasSpec> out;
  for (const auto& shape : shapes()) {
    Spectrum a = Spectrum::Zero(grid.band_count());
    for (int b = 0; b < grid.band_count(); ++b) {
      for (const auto& band : shape.bands) {
        const double z = (grid[b] - band.center_um) / band.width_um;
        a[b] += band.relative * std::exp(-0.5 * z * z);
      }
    }
    const double m = a.maxCoeff();
    if (m > 0.0) a *= shape.peak / m;
    out.push_back({shape.name, std::move(a)});
  }
  return out;
}

GasSpec builtin_gas(const SpectralGrid& grid, const std::string& name) {
  for (auto& g : builtin_gases(grid)) {
    if (g.name == name) return g;
  }
  throw DomainError("unknown gas '" + name + "'");
}

}  // namespace plume::sim
