#include "mvlci/image.hpp"

#include <algorithm>
#include <cmath>

namespace mvlci {

Image::Image(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), data_(width * height, fill) {}

Image::Image(std::size_t width, std::size_t height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (data_.size() != width_ * height_) {
    throw Error("image data length " + std::to_string(data_.size()) + " does not match " +
                std::to_string(width_) + "x" + std::to_string(height_));
  }
}

Image& Image::clamp() {
  for (double& v : data_) {
    v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
  }
  return *this;
}

void require_same_shape(const Image& a, const Image& b, const std::string& what) {
  if (!a.same_shape(b)) {
    throw Error(what + ": dimension mismatch (" + std::to_string(a.width()) + "x" +
                std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                std::to_string(b.height()) + ")");
  }
}

Image crop(const Image& image, std::size_t x0, std::size_t y0, std::size_t width,
           std::size_t height) {
  if (x0 + width > image.width() || y0 + height > image.height()) {
    throw Error("crop: window exceeds image bounds");
  }
  Image out(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      out(x, y) = image(x0 + x, y0 + y);
    }
  }
  return out;
}

}  // namespace mvlci
