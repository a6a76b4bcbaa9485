#include "mvlci/tv.hpp"

#include <cmath>

namespace mvlci {

double soft_threshold(double value, double threshold) {
  const double mag = std::abs(value) - threshold;
  return mag > 0.0 ? std::copysign(mag, value) : 0.0;
}

void tv_shrink(std::span<double> aux, double threshold) {
  for (double& v : aux) v = soft_threshold(v, threshold);
}

double tv_seminorm(const Image& image) {
  return FiniteDifference(image.width(), image.height()).seminorm(image.pixels());
}

FiniteDifference::FiniteDifference(std::size_t width, std::size_t height)
    : FiniteDifference(width, height, Mask(width, height, true)) {}

FiniteDifference::FiniteDifference(std::size_t width, std::size_t height, const Mask& support)
    : width_(width), height_(height), edge_x_(width * height, 0), edge_y_(width * height, 0) {
  if (support.width != width || support.height != height) {
    throw Error("FiniteDifference: support mask does not match the grid");
  }
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t i = y * width + x;
      if (!support[i]) continue;
      edge_x_[i] = x + 1 < width && support[i + 1];
      edge_y_[i] = y + 1 < height && support[i + width];
    }
  }
}

void FiniteDifference::apply(std::span<const double> u, std::span<double> gx,
                             std::span<double> gy) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    gx[i] = edge_x_[i] ? u[i + 1] - u[i] : 0.0;
    gy[i] = edge_y_[i] ? u[i + width_] - u[i] : 0.0;
  }
}

void FiniteDifference::apply_transpose(std::span<const double> gx, std::span<const double> gy,
                                       std::span<double> out) const {
  const std::size_t n = size();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (edge_x_[i]) {
      out[i] -= gx[i];
      out[i + 1] += gx[i];
    }
    if (edge_y_[i]) {
      out[i] -= gy[i];
      out[i + width_] += gy[i];
    }
  }
}

double FiniteDifference::seminorm(std::span<const double> u) const {
  double tv = 0.0;
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    if (edge_x_[i]) tv += std::abs(u[i + 1] - u[i]);
    if (edge_y_[i]) tv += std::abs(u[i + width_] - u[i]);
  }
  return tv;
}

}  // namespace mvlci
