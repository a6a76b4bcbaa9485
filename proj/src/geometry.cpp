#include "mvlci/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mvlci {

namespace {

// Integer stencil [first, last] of a bilinear sample at `pos`; `last` equals
// `first` when pos is integral.
struct Stencil1D {
  long first;
  long last;
  double frac;
};

Stencil1D stencil_at(double pos) {
  const double f = std::floor(pos);
  const double frac = pos - f;
  const auto first = static_cast<long>(f);
  return {first, frac == 0.0 ? first : first + 1, frac};
}

bool inside(const Stencil1D& s, std::size_t extent) {
  return s.first >= 0 && s.last < static_cast<long>(extent);
}

void require_shift_fits(double dx, double dy, std::size_t width, std::size_t height,
                        const char* what) {
  if (width == 0 || height == 0) throw Error(std::string(what) + ": empty grid");
  if (!std::isfinite(dx) || !std::isfinite(dy) || std::abs(dx) >= static_cast<double>(width) ||
      std::abs(dy) >= static_cast<double>(height)) {
    throw Error(std::string(what) + ": shift (" + std::to_string(dx) + ", " +
                std::to_string(dy) + ") exceeds the " + std::to_string(width) + "x" +
                std::to_string(height) + " grid");
  }
}

}  // namespace

ShiftOperator build_shift(double dx, double dy, std::size_t width, std::size_t height) {
  require_shift_fits(dx, dy, width, height, "build_shift");
  ShiftOperator op;
  op.dx_ = dx;
  op.dy_ = dy;
  op.width_ = width;
  op.height_ = height;
  op.offsets_.reserve(width * height + 1);
  op.entries_.reserve(width * height * 4);
  op.offsets_.push_back(0);
  for (std::size_t y = 0; y < height; ++y) {
    const Stencil1D sy = stencil_at(static_cast<double>(y) - dy);
    for (std::size_t x = 0; x < width; ++x) {
      const Stencil1D sx = stencil_at(static_cast<double>(x) - dx);
      for (long yy = sy.first; yy <= sy.last; ++yy) {
        if (yy < 0 || yy >= static_cast<long>(height)) continue;
        const double wy = yy == sy.first ? 1.0 - sy.frac : sy.frac;
        for (long xx = sx.first; xx <= sx.last; ++xx) {
          if (xx < 0 || xx >= static_cast<long>(width)) continue;
          const double wx = xx == sx.first ? 1.0 - sx.frac : sx.frac;
          const double w = wx * wy;
          if (w == 0.0) continue;
          op.entries_.push_back(
              {static_cast<std::uint32_t>(static_cast<std::size_t>(yy) * width +
                                          static_cast<std::size_t>(xx)),
               w});
        }
      }
      op.offsets_.push_back(op.entries_.size());
    }
  }
  return op;
}

void ShiftOperator::apply(std::span<const double> in, std::span<double> out) const {
  if (in.size() != size() || out.size() != size()) {
    throw Error("apply_shift: dimension mismatch");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    double acc = 0.0;
    for (const Entry& e : row(i)) acc += e.weight * in[e.source];
    out[i] = acc;
  }
}

void ShiftOperator::apply_transpose(std::span<const double> in, std::span<double> out) const {
  if (in.size() != size() || out.size() != size()) {
    throw Error("apply_shift: dimension mismatch");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    for (const Entry& e : row(i)) out[e.source] += e.weight * in[i];
  }
}

Image apply_shift(const ShiftOperator& op, const Image& image) {
  if (image.width() != op.width() || image.height() != op.height()) {
    throw Error("apply_shift: image " + std::to_string(image.width()) + "x" +
                std::to_string(image.height()) + " does not match operator grid " +
                std::to_string(op.width()) + "x" + std::to_string(op.height()));
  }
  Image out(image.width(), image.height());
  op.apply(image.pixels(), out.pixels());
  return out;
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::size_t RegionMasks::joint_unknowns() const {
  std::size_t n = common.count();
  for (const Mask& d : disjoint) n += d.count();
  return n;
}

RegionMasks build_region_masks(double dx, double dy, std::size_t width, std::size_t height) {
  require_shift_fits(dx, dy, width, height, "build_region_masks");
  RegionMasks masks;
  masks.common = Mask(width, height, false);
  for (std::size_t y = 0; y < height; ++y) {
    const bool row_ok = inside(stencil_at(static_cast<double>(y) + dy), height);
    for (std::size_t x = 0; x < width; ++x) {
      masks.common.bits[y * width + x] =
          row_ok && inside(stencil_at(static_cast<double>(x) + dx), width);
    }
  }

  // Sensor 2 sees common content at x where the whole stencil of x - shift
  // lies in R_C. For fractional shifts the boundary pixel that mixes R_C with
  // R_D^(1) content is left to the disjoint component.
  Mask view2(width, height, false);
  for (std::size_t y = 0; y < height; ++y) {
    const Stencil1D sy = stencil_at(static_cast<double>(y) - dy);
    if (!inside(sy, height)) continue;
    for (std::size_t x = 0; x < width; ++x) {
      const Stencil1D sx = stencil_at(static_cast<double>(x) - dx);
      if (!inside(sx, width)) continue;
      bool all = true;
      for (long yy = sy.first; yy <= sy.last && all; ++yy) {
        for (long xx = sx.first; xx <= sx.last && all; ++xx) {
          all = masks.common[static_cast<std::size_t>(yy) * width + static_cast<std::size_t>(xx)];
        }
      }
      view2.bits[y * width + x] = all;
    }
  }

  masks.common_view = {masks.common, view2};
  for (const Mask& cv : masks.common_view) {
    Mask d(width, height, false);
    for (std::size_t i = 0; i < d.bits.size(); ++i) d.bits[i] = !cv[i];
    masks.disjoint.push_back(std::move(d));
  }
  return masks;
}

Image apply_mask(const Image& image, const Mask& mask) {
  if (image.width() != mask.width || image.height() != mask.height) {
    throw Error("apply_mask: dimension mismatch");
  }
  Image out(image.width(), image.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask[i]) out.pixels()[i] = image.pixels()[i];
  }
  return out;
}

Image mask_image(const Mask& mask) {
  Image out(mask.width, mask.height);
  for (std::size_t i = 0; i < out.size(); ++i) out.pixels()[i] = mask[i] ? 1.0 : 0.0;
  return out;
}

Decomposition decompose(const Image& view1, const Image& view2, const RegionMasks& masks,
                        const ShiftOperator& shift) {
  require_same_shape(view1, view2, "decompose");
  if (view1.width() != masks.width() || view1.height() != masks.height() ||
      view1.width() != shift.width() || view1.height() != shift.height() ||
      masks.disjoint.size() < 2) {
    throw Error("decompose: views, masks and shift operator disagree on dimensions");
  }
  Decomposition d;
  d.common = apply_mask(view1, masks.common);
  d.disjoint1 = apply_mask(view1, masks.disjoint[0]);
  Image predicted = apply_shift(shift, d.common);
  Image residual(view2.width(), view2.height());
  for (std::size_t i = 0; i < residual.size(); ++i) {
    residual.pixels()[i] = view2.pixels()[i] - predicted.pixels()[i];
  }
  d.disjoint2 = apply_mask(residual, masks.disjoint[1]);
  return d;
}

}  // namespace mvlci
