#pragma once

#include <span>
#include <vector>

#include "mvlci/geometry.hpp"
#include "mvlci/image.hpp"

namespace mvlci {

/// Anisotropic total variation: sum of |forward differences| in x and y,
/// replicate boundary (the difference leaving the grid is zero).
double tv_seminorm(const Image& image);

/// Elementwise soft-thresholding: sign(v) * max(|v| - threshold, 0).
void tv_shrink(std::span<double> aux, double threshold);
double soft_threshold(double value, double threshold);

/// Forward-difference operator D on a grid, optionally restricted to a
/// support mask: a difference is kept only when both endpoints lie in the
/// support, which is the replicate boundary applied at the mask edge.
class FiniteDifference {
 public:
  FiniteDifference(std::size_t width, std::size_t height);
  FiniteDifference(std::size_t width, std::size_t height, const Mask& support);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return width_ * height_; }

  /// gx, gy each of size(); differences at invalid edges are written as 0.
  void apply(std::span<const double> u, std::span<double> gx, std::span<double> gy) const;
  /// out = D^T (gx, gy); entries at invalid edges of gx, gy are ignored.
  void apply_transpose(std::span<const double> gx, std::span<const double> gy,
                       std::span<double> out) const;
  /// sum |D u| over valid edges.
  double seminorm(std::span<const double> u) const;

  bool valid_x(std::size_t i) const { return edge_x_[i] != 0; }
  bool valid_y(std::size_t i) const { return edge_y_[i] != 0; }

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> edge_x_;
  std::vector<std::uint8_t> edge_y_;
};

}  // namespace mvlci
