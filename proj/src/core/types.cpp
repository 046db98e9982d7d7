#include "plume/core/types.hpp"

#include "plume/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace plume {

SpectralGrid::SpectralGrid(std::vector<double> wavelengths_um) : wavelengths_(std::move(wavelengths_um)) {
  if (wavelengths_.empty()) throw DomainError("spectral grid needs at least one band");
  for (std::size_t i = 0; i < wavelengths_.size(); ++i) {
    if (!(wavelengths_[i] > 0.0) || !std::isfinite(wavelengths_[i])) {
      throw DomainError("wavelengths must be positive and finite");
    }
    if (i > 0 && !(wavelengths_[i] > wavelengths_[i - 1])) {
      throw DomainError("wavelengths must be strictly increasing");
    }
  }
}

SpectralGrid SpectralGrid::uniform(double first_um, double last_um, int bands) {
  if (bands < 1) throw DomainError("band count must be positive");
  std::vector<double> w(static_cast<std::size_t>(bands));
  if (bands == 1) {
    w[0] = first_um;
  } else {
    const double step = (last_um - first_um) / static_cast<double>(bands - 1);
    for (int b = 0; b < bands; ++b) w[static_cast<std::size_t>(b)] = first_um + step * b;
    w.back() = last_um;
  }
  return SpectralGrid(std::move(w));
}

SpectralGrid SpectralGrid::lwir(int bands) { return uniform(7.56, 13.16, bands); }

RadianceCube::RadianceCube(int height, int width, SpectralGrid grid)
    : height_(height), width_(width), grid_(std::move(grid)) {
  if (height < 1 || width < 1) throw DomainError("cube dimensions must be positive");
  data_.assign(offset(pixel_count()), 0.0);
}

RadianceCube::RadianceCube(int height, int width, SpectralGrid grid, std::vector<double> data)
    : height_(height), width_(width), grid_(std::move(grid)), data_(std::move(data)) {
  if (height < 1 || width < 1) throw DomainError("cube dimensions must be positive");
  if (data_.size() != offset(pixel_count())) {
    throw DomainError("cube data length " + std::to_string(data_.size()) + " does not match " +
                      std::to_string(height) + "x" + std::to_string(width) + "x" +
                      std::to_string(grid_.band_count()));
  }
  if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
    throw DomainError("cube data must be finite");
  }
}

RowMatrix RadianceCube::gather(std::span<const int> pixel_indices) const {
  RowMatrix out(static_cast<Eigen::Index>(pixel_indices.size()), bands());
  for (std::size_t i = 0; i < pixel_indices.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = spectrum(pixel_indices[i]).transpose();
  }
  return out;
}

PixelMask::PixelMask(int height, int width, bool value) : height_(height), width_(width) {
  if (height < 1 || width < 1) throw DomainError("mask dimensions must be positive");
  bits_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), value ? 1 : 0);
}

PixelMask PixelMask::from_indices(int height, int width, std::span<const int> pixel_indices) {
  PixelMask m(height, width);
  for (int p : pixel_indices) {
    if (p < 0 || p >= m.size()) throw DomainError("pixel index out of range");
    m.set(p);
  }
  return m;
}

int PixelMask::count() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<int> PixelMask::indices() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count()));
  for (int p = 0; p < size(); ++p) {
    if (bits_[static_cast<std::size_t>(p)]) out.push_back(p);
  }
  return out;
}

namespace {
void require_same_shape(const PixelMask& a, const PixelMask& b) {
  if (!a.same_shape(b)) throw DomainError("mask dimensions differ");
}
}  // namespace

bool PixelMask::is_subset_of(const PixelMask& other) const {
  require_same_shape(*this, other);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !other.bits_[i]) return false;
  }
  return true;
}

bool PixelMask::intersects(const PixelMask& other) const {
  require_same_shape(*this, other);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && other.bits_[i]) return true;
  }
  return false;
}

PixelMask PixelMask::operator|(const PixelMask& other) const {
  require_same_shape(*this, other);
  PixelMask out = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] | other.bits_[i];
  return out;
}

PixelMask PixelMask::operator&(const PixelMask& other) const {
  require_same_shape(*this, other);
  PixelMask out = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] & other.bits_[i];
  return out;
}

PixelMask PixelMask::operator-(const PixelMask& other) const {
  require_same_shape(*this, other);
  PixelMask out = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] & static_cast<std::uint8_t>(!other.bits_[i]);
  return out;
}

PixelMask PixelMask::operator~() const {
  PixelMask out = *this;
  for (auto& b : out.bits_) b = static_cast<std::uint8_t>(!b);
  return out;
}

}  // namespace plume
