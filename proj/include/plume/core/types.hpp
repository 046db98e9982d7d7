#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace plume {

using Spectrum = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using PixelMatrixView = Eigen::Map<const RowMatrix>;

struct Pixel {
  int row = 0;
  int col = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Band centers in micrometers, strictly increasing.
class SpectralGrid {
 public:
  SpectralGrid() = default;
  explicit SpectralGrid(std::vector<double> wavelengths_um);

  /// `bands` evenly spaced centers from first_um to last_um inclusive.
  static SpectralGrid uniform(double first_um, double last_um, int bands);
  /// 7.56-13.16 um, the LWIR window of the airborne sensor being modeled.
  static SpectralGrid lwir(int bands = 128);

  int band_count() const noexcept { return static_cast<int>(wavelengths_.size()); }
  const std::vector<double>& wavelengths() const noexcept { return wavelengths_; }
  double operator[](int band) const { return wavelengths_[static_cast<std::size_t>(band)]; }

  friend bool operator==(const SpectralGrid&, const SpectralGrid&) = default;

 private:
  std::vector<double> wavelengths_;
};

/// H x W x B radiance, row-major (row, col, band). Values in W m^-2 sr^-1 um^-1.
class RadianceCube {
 public:
  RadianceCube() = default;
  RadianceCube(int height, int width, SpectralGrid grid);
  RadianceCube(int height, int width, SpectralGrid grid, std::vector<double> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int bands() const noexcept { return grid_.band_count(); }
  int pixel_count() const noexcept { return height_ * width_; }
  const SpectralGrid& grid() const noexcept { return grid_; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  int index(int row, int col) const noexcept { return row * width_ + col; }

  double at(int row, int col, int band) const {
    return data_[offset(index(row, col)) + static_cast<std::size_t>(band)];
  }
  double& at(int row, int col, int band) {
    return data_[offset(index(row, col)) + static_cast<std::size_t>(band)];
  }

  Eigen::Map<const Eigen::VectorXd> spectrum(int pixel) const {
    return {data_.data() + offset(pixel), bands()};
  }
  Eigen::Map<Eigen::VectorXd> spectrum(int pixel) { return {data_.data() + offset(pixel), bands()}; }
  Eigen::Map<const Eigen::VectorXd> spectrum(int row, int col) const { return spectrum(index(row, col)); }
  Eigen::Map<Eigen::VectorXd> spectrum(int row, int col) { return spectrum(index(row, col)); }

  /// All pixels as a (H*W) x B matrix view.
  PixelMatrixView pixels() const { return {data_.data(), pixel_count(), bands()}; }
  Eigen::Map<RowMatrix> pixels() { return {data_.data(), pixel_count(), bands()}; }

  /// Copy of the selected pixel spectra, one row each, in the order given.
  RowMatrix gather(std::span<const int> pixel_indices) const;

 private:
  std::size_t offset(int pixel) const noexcept {
    return static_cast<std::size_t>(pixel) * static_cast<std::size_t>(bands());
  }

  int height_ = 0;
  int width_ = 0;
  SpectralGrid grid_;
  std::vector<double> data_;
};

/// One boolean per pixel.
class PixelMask {
 public:
  PixelMask() = default;
  PixelMask(int height, int width, bool value = false);

  static PixelMask from_indices(int height, int width, std::span<const int> pixel_indices);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int size() const noexcept { return height_ * width_; }

  bool test(int pixel) const { return bits_[static_cast<std::size_t>(pixel)] != 0; }
  bool test(int row, int col) const { return test(row * width_ + col); }
  void set(int pixel, bool value = true) { bits_[static_cast<std::size_t>(pixel)] = value ? 1 : 0; }
  void set(int row, int col, bool value = true) { set(row * width_ + col, value); }

  int count() const;
  bool any() const { return count() > 0; }
  bool all() const { return count() == size(); }

  /// Selected pixel indices in row-major order.
  std::vector<int> indices() const;

  bool same_shape(const PixelMask& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool is_subset_of(const PixelMask& other) const;
  bool intersects(const PixelMask& other) const;

  PixelMask operator|(const PixelMask& other) const;
  PixelMask operator&(const PixelMask& other) const;
  /// Set difference.
  PixelMask operator-(const PixelMask& other) const;
  PixelMask operator~() const;

  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  friend bool operator==(const PixelMask&, const PixelMask&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// One real value per pixel (score maps, gradients, plume densities).
struct ScalarMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  ScalarMap() = default;
  ScalarMap(int h, int w, double fill = 0.0)
      : height(h), width(w), values(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

  double operator()(int row, int col) const { return values[static_cast<std::size_t>(row * width + col)]; }
  double& operator()(int row, int col) { return values[static_cast<std::size_t>(row * width + col)]; }
  int size() const noexcept { return height * width; }
};

}  // namespace plume

namespace plume {

/// Sign of the expected plume perturbation: emission (psi >= 0) or
/// absorption (psi <= 0, plume cooler than the background).
enum class SignMode { Emission, Absorption };

}  // namespace plume
