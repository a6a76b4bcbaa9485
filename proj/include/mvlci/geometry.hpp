#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mvlci/image.hpp"

namespace mvlci {

/// Sparse operator realizing a fractional 2D translation on a fixed grid:
/// (U J)(x, y) = J(x - dx, y - dy), bilinear interpolation, zero outside.
/// Each output pixel has at most four non-negative weights.
class ShiftOperator {
 public:
  struct Entry {
    std::uint32_t source;
    double weight;
  };

  ShiftOperator() = default;

  double dx() const { return dx_; }
  double dy() const { return dy_; }
  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return width_ * height_; }

  /// Stencil of output pixel `index`.
  std::span<const Entry> row(std::size_t index) const {
    return {entries_.data() + offsets_[index], entries_.data() + offsets_[index + 1]};
  }

  void apply(std::span<const double> in, std::span<double> out) const;
  /// out = U^T in.
  void apply_transpose(std::span<const double> in, std::span<double> out) const;

  friend ShiftOperator build_shift(double dx, double dy, std::size_t width, std::size_t height);

 private:
  double dx_ = 0.0;
  double dy_ = 0.0;
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<Entry> entries_;
};

ShiftOperator build_shift(double dx, double dy, std::size_t width, std::size_t height);

Image apply_shift(const ShiftOperator& op, const Image& image);

/// Boolean pixel mask over a width x height grid.
struct Mask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(std::size_t w, std::size_t h, bool value) : width(w), height(h), bits(w * h, value) {}

  bool operator[](std::size_t i) const { return bits[i] != 0; }
  std::size_t count() const;
  bool operator==(const Mask&) const = default;
};

/// Common / disjoint regions for a two-sensor pair.
///
/// `common` is R_C on the reference (sensor 1) grid: pixels whose content
/// lands fully inside sensor 2's view. `common_view[k]` is the image of R_C
/// on sensor k's own grid and `disjoint[k]` its complement there, so the two
/// partition each sensor's grid.
struct RegionMasks {
  Mask common;
  std::vector<Mask> common_view;
  std::vector<Mask> disjoint;

  std::size_t width() const { return common.width; }
  std::size_t height() const { return common.height; }
  /// |R_C| + sum_k |R_D^(k)|.
  std::size_t joint_unknowns() const;
};

RegionMasks build_region_masks(double dx, double dy, std::size_t width, std::size_t height);

struct Decomposition {
  Image common;
  Image disjoint1;
  Image disjoint2;
};

/// Splits two views into I_C, I_D^(1), I_D^(2) with view1 = I_C + I_D^(1)
/// and view2 = U I_C + I_D^(2) on R_D^(2).
Decomposition decompose(const Image& view1, const Image& view2, const RegionMasks& masks,
                        const ShiftOperator& shift);

/// Zeroes every pixel outside the mask.
Image apply_mask(const Image& image, const Mask& mask);

/// Mask as a black/white image, for debugging output.
Image mask_image(const Mask& mask);

}  // namespace mvlci
