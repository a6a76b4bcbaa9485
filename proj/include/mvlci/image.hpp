#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvlci {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grayscale intensity grid, row-major. Pixel (x, y) lives at y * width + x.
///
/// Values are nominally in [0, 1]; reconstructions may leave that range
/// until clamp() is applied.
class Image {
 public:
  Image() = default;
  Image(std::size_t width, std::size_t height, double fill = 0.0);
  Image(std::size_t width, std::size_t height, std::vector<double> data);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
  double operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

  std::span<double> pixels() { return data_; }
  std::span<const double> pixels() const { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Clamps every pixel into [0, 1]; non-finite values become 0.
  Image& clamp();

  bool operator==(const Image& other) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

/// Throws Error unless both images have the same dimensions.
void require_same_shape(const Image& a, const Image& b, const std::string& what);

/// Sub-image of columns [x0, x0 + width) and rows [y0, y0 + height).
Image crop(const Image& image, std::size_t x0, std::size_t y0, std::size_t width,
           std::size_t height);

}  // namespace mvlci
