#pragma once

#include "plume/core/types.hpp"

#include <filesystem>
#include <vector>

namespace plume {

/// Container format: one line of JSON
///   {"magic":"PLBC1","height":H,"width":W,"band_count":B,
///    "wavelengths":[...],"dtype":"f32"|"u8"|"i32","byte_order":"little"}
/// terminated by '\n', followed by the row-major little-endian payload.
inline constexpr const char* kCubeMagic = "PLBC1";

void write_cube(const RadianceCube& cube, const std::filesystem::path& path);
RadianceCube read_cube(const std::filesystem::path& path);

void write_mask(const PixelMask& mask, const std::filesystem::path& path);
PixelMask read_mask(const std::filesystem::path& path);

/// Single-band f32 map (ACE scores, gradients, plume density).
void write_scalar_map(const ScalarMap& map, const std::filesystem::path& path);
ScalarMap read_scalar_map(const std::filesystem::path& path);

/// Single-band i32 map (segment labels).
struct LabelImage {
  int height = 0;
  int width = 0;
  std::vector<int> labels;
};
void write_labels(const LabelImage& labels, const std::filesystem::path& path);
LabelImage read_labels(const std::filesystem::path& path);

}  // namespace plume
