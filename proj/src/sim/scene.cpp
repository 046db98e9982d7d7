#include "plume/sim/scene.hpp"

#include "plume/core/error.hpp"
#include "plume/core/planck.hpp"
#include "plume/core/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace plume::sim {

namespace {

double gauss(double x, double center, double width) {
  const double z = (x - center) / width;
  return std::exp(-0.5 * z * z);
}

struct EmissivityShape {
  double base;
  double slope;  // per um around 10 um
  struct Dip {
    double depth, center, width;
  };
  std::vector<Dip> dips;
};

Spectrum render_shape(const SpectralGrid& grid, const EmissivityShape& shape) {
  Spectrum e(grid.band_count());
  for (int b = 0; b < grid.band_count(); ++b) {
    const double l = grid[b];
    double v = shape.base + shape.slope * (l - 10.0);
    for (const auto& d : shape.dips) v -= d.depth * gauss(l, d.center, d.width);
    e[b] = std::clamp(v, 0.7, 1.0);
  }
  return e;
}

const std::array<EmissivityShape, 6>& builtin_shapes() {
  static const std::array<EmissivityShape, 6> shapes{{
      {0.985, -0.002, {}},                                    // water-like, nearly gray
      {0.972, 0.003, {{0.01, 9.0, 0.6}}},                     // vegetation
      {0.950, -0.006, {}},                                    // asphalt
      {0.935, 0.004, {{0.18, 8.6, 0.35}, {0.08, 9.25, 0.2}}}, // quartz sand, reststrahlen pair
      {0.920, 0.006, {{0.07, 9.1, 0.5}}},                     // concrete
      {0.780, 0.020, {}},                                     // weathered metal roof
  }};
  return shapes;
}

/// Region id per pixel.
std::vector<int> voronoi_regions(int h, int w, int regions, Rng& rng) {
  std::uniform_real_distribution<double> ur(0.0, static_cast<double>(h));
  std::uniform_real_distribution<double> uc(0.0, static_cast<double>(w));
  std::vector<std::array<double, 2>> sites(static_cast<std::size_t>(regions));
  for (auto& s : sites) s = {ur(rng), uc(rng)};
  std::vector<int> out(static_cast<std::size_t>(h * w));
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int i = 0; i < regions; ++i) {
        const double dr = r + 0.5 - sites[static_cast<std::size_t>(i)][0];
        const double dc = c + 0.5 - sites[static_cast<std::size_t>(i)][1];
        const double d = dr * dr + dc * dc;
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      out[static_cast<std::size_t>(r * w + c)] = best;
    }
  }
  return out;
}

/// Guillotine partition: repeatedly split the largest rectangle across its
/// longer side, keeping both parts at least 4 pixels wide.
std::vector<int> rectangle_regions(int h, int w, int regions, Rng& rng) {
  struct Rect {
    int r0, c0, r1, c1;  // half-open
    int area() const { return (r1 - r0) * (c1 - c0); }
  };
  constexpr int kMinSide = 4;
  std::vector<Rect> rects{{0, 0, h, w}};
  std::uniform_real_distribution<double> frac(0.3, 0.7);
  while (static_cast<int>(rects.size()) < regions) {
    auto it = std::max_element(rects.begin(), rects.end(), [](const Rect& a, const Rect& b) { return a.area() < b.area(); });
    const Rect r = *it;
    const bool split_rows = (r.r1 - r.r0) >= (r.c1 - r.c0);
    const int len = split_rows ? r.r1 - r.r0 : r.c1 - r.c0;
    if (len < 2 * kMinSide) break;
    int cut = static_cast<int>(std::lround(frac(rng) * len));
    cut = std::clamp(cut, kMinSide, len - kMinSide);
    Rect a = r;
    Rect b = r;
    if (split_rows) {
      a.r1 = r.r0 + cut;
      b.r0 = r.r0 + cut;
    } else {
      a.c1 = r.c0 + cut;
      b.c0 = r.c0 + cut;
    }
    *it = a;
    rects.push_back(b);
  }
  std::vector<int> out(static_cast<std::size_t>(h * w));
  for (std::size_t i = 0; i < rects.size(); ++i) {
    for (int rr = rects[i].r0; rr < rects[i].r1; ++rr) {
      for (int cc = rects[i].c0; cc < rects[i].c1; ++cc) out[static_cast<std::size_t>(rr * w + cc)] = static_cast<int>(i);
    }
  }
  return out;
}

/// Sum of low-frequency cosines scaled so the peak magnitude equals `amplitude`.
std::vector<double> smooth_field(int h, int w, double amplitude, Rng& rng) {
  std::vector<double> f(static_cast<std::size_t>(h * w), 0.0);
  if (amplitude <= 0.0) return f;
  constexpr int kWaves = 6;
  std::uniform_real_distribution<double> period(24.0, 96.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int k = 0; k < kWaves; ++k) {
    const double p = period(rng);
    const double a = angle(rng);
    const double phase = angle(rng);
    const double kr = std::sin(a) * 2.0 * std::numbers::pi / p;
    const double kc = std::cos(a) * 2.0 * std::numbers::pi / p;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) f[static_cast<std::size_t>(r * w + c)] += std::cos(kr * r + kc * c + phase);
    }
  }
  double peak = 0.0;
  for (double v : f) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : f) v *= amplitude / peak;
  }
  return f;
}

}  // namespace

Layout parse_layout(std::string_view name) {
  if (name == "rectangles") return Layout::Rectangles;
  if (name == "voronoi") return Layout::Voronoi;
  throw DomainError("invalid layout '" + std::string(name) + "' (expected rectangles or voronoi)");
}

std::string to_string(Layout layout) { return layout == Layout::Rectangles ? "rectangles" : "voronoi"; }

std::vector<Spectrum> material_emissivities(const SpectralGrid& grid, int count, std::uint64_t seed) {
  if (count < 1) throw DomainError("material count must be positive");
  std::vector<Spectrum> out;
  const auto& shapes = builtin_shapes();
  for (int i = 0; i < count && i < static_cast<int>(shapes.size()); ++i) {
    out.push_back(render_shape(grid, shapes[static_cast<std::size_t>(i)]));
  }
  Rng rng = make_rng(seed, 101);
  std::uniform_real_distribution<double> base(0.80, 0.98);
  std::uniform_real_distribution<double> slope(-0.01, 0.01);
  std::uniform_real_distribution<double> depth(0.0, 0.15);
  std::uniform_real_distribution<double> center(8.0, 12.0);
  std::uniform_real_distribution<double> width(0.2, 0.6);
  std::uniform_int_distribution<int> ndips(0, 2);
  while (static_cast<int>(out.size()) < count) {
    EmissivityShape s{base(rng), slope(rng), {}};
    const int n = ndips(rng);
    for (int k = 0; k < n; ++k) s.dips.push_back({depth(rng), center(rng), width(rng)});
    out.push_back(render_shape(grid, s));
  }
  return out;
}

AtmosProfile default_atmosphere(const SpectralGrid& grid, double temperature_k) {
  AtmosProfile a;
  const int n = grid.band_count();
  a.transmission.resize(n);
  a.upwelling.resize(n);
  a.downwelling.resize(n);
  for (int b = 0; b < n; ++b) {
    const double l = grid[b];
    double tau = 0.93 - 0.20 * gauss(l, 7.56, 0.7) - 0.08 * gauss(l, 9.6, 0.2);
    if (l > 10.5) tau -= 0.15 * std::pow((l - 10.5) / 2.66, 2);
    tau = std::clamp(tau, 0.7, 0.95);
    const double bb = planck_radiance(l, temperature_k);
    a.transmission[b] = tau;
    a.upwelling[b] = (1.0 - tau) * bb;
    a.downwelling[b] = (1.0 - std::pow(tau, 1.8)) * bb;
  }
  return a;
}

RadianceCube render_off_plume(const SurfaceTruth& surface, const AtmosProfile& atmosphere, const SpectralGrid& grid) {
  const int bands = grid.band_count();
  if (surface.emissivity.cols() != bands || atmosphere.transmission.size() != bands) {
    throw DomainError("surface/atmosphere band count does not match grid");
  }
  RadianceCube out(surface.height, surface.width, grid);
  for (int p = 0; p < out.pixel_count(); ++p) {
    const double t = surface.temperature_k[static_cast<std::size_t>(p)];
    auto dst = out.spectrum(p);
    for (int b = 0; b < bands; ++b) {
      const double eps = surface.emissivity(p, b);
      const double rho = 1.0 - eps;
      dst[b] = atmosphere.upwelling[b] +
               atmosphere.transmission[b] * (eps * planck_radiance(grid[b], t) + rho * atmosphere.downwelling[b]);
    }
  }
  return out;
}

Scene gen_scene(const SceneConfig& config) {
  if (config.height < 1 || config.width < 1 || config.bands < 1) throw DomainError("scene dimensions must be positive");
  if (config.material_count < 1) throw DomainError("material count must be positive");
  if (config.noise_level < 0.0) throw DomainError("noise level must be non-negative");
  if (config.temperature_amplitude_k < 0.0 || config.temperature_amplitude_k > 3.0) {
    throw DomainError("temperature field amplitude must be within [0, 3] K");
  }
  const SpectralGrid grid = SpectralGrid::lwir(config.bands);
  const int h = config.height;
  const int w = config.width;
  const int regions = config.region_count > 0 ? config.region_count : 2 * config.material_count;

  Rng layout_rng = make_rng(config.seed, 1);
  const std::vector<int> region =
      config.layout == Layout::Rectangles ? rectangle_regions(h, w, regions, layout_rng) : voronoi_regions(h, w, regions, layout_rng);
  const int n_regions = *std::max_element(region.begin(), region.end()) + 1;

  // Every material appears once before any repeats, then random assignment.
  Rng assign_rng = make_rng(config.seed, 2);
  std::vector<int> region_material(static_cast<std::size_t>(n_regions));
  std::uniform_int_distribution<int> pick(0, config.material_count - 1);
  for (int i = 0; i < n_regions; ++i) {
    region_material[static_cast<std::size_t>(i)] = i < config.material_count ? i : pick(assign_rng);
  }
  std::shuffle(region_material.begin(), region_material.end(), assign_rng);

  const auto emissivities = material_emissivities(grid, config.material_count, config.seed);
  Rng temp_rng = make_rng(config.seed, 3);
  std::uniform_real_distribution<double> base_temp(292.0, 308.0);
  std::vector<double> material_temp(static_cast<std::size_t>(config.material_count));
  for (auto& t : material_temp) t = base_temp(temp_rng);
  const std::vector<double> field = smooth_field(h, w, config.temperature_amplitude_k, temp_rng);

  Scene scene;
  SurfaceTruth& s = scene.surface;
  s.height = h;
  s.width = w;
  s.emissivity.resize(h * w, config.bands);
  s.temperature_k.resize(static_cast<std::size_t>(h * w));
  s.material_label.resize(static_cast<std::size_t>(h * w));
  for (int p = 0; p < h * w; ++p) {
    const int m = region_material[static_cast<std::size_t>(region[static_cast<std::size_t>(p)])];
    s.material_label[static_cast<std::size_t>(p)] = m;
    s.emissivity.row(p) = emissivities[static_cast<std::size_t>(m)].transpose();
    s.temperature_k[static_cast<std::size_t>(p)] = material_temp[static_cast<std::size_t>(m)] + field[static_cast<std::size_t>(p)];
  }
  scene.atmosphere = default_atmosphere(grid, config.atmosphere_temperature_k);
  scene.l_off = render_off_plume(s, scene.atmosphere, grid);
  scene.cube = scene.l_off;
  if (config.noise_level > 0.0) {
    Rng noise_rng = make_rng(config.seed, 4);
    std::normal_distribution<double> noise(0.0, config.noise_level);
    for (double& v : scene.cube.data()) v += noise(noise_rng);
  }
  return scene;
}

}  // namespace plume::sim
