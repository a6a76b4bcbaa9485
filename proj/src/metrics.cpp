#include "mvlci/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvlci {

namespace {

double psnr_from_mse(double m) {
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

}  // namespace

double mse(const Image& reference, const Image& test) {
  require_same_shape(reference, test, "mse");
  if (reference.empty()) throw Error("mse: empty images");
  double acc = 0.0;
  const auto a = reference.pixels();
  const auto b = test.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

double psnr(const Image& reference, const Image& test) {
  return psnr_from_mse(mse(reference, test));
}

double psnr(const Image& reference, const Image& test, const Mask& region) {
  require_same_shape(reference, test, "psnr");
  if (region.width != reference.width() || region.height != reference.height()) {
    throw Error("psnr: region mask dimension mismatch");
  }
  double acc = 0.0;
  std::size_t count = 0;
  const auto a = reference.pixels();
  const auto b = test.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!region[i]) continue;
    acc += (a[i] - b[i]) * (a[i] - b[i]);
    ++count;
  }
  if (count == 0) throw Error("psnr: empty region");
  return psnr_from_mse(acc / static_cast<double>(count));
}

double ssim(const Image& reference, const Image& test) {
  require_same_shape(reference, test, "ssim");
  if (reference.empty()) throw Error("ssim: empty images");
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const std::size_t ww = std::min<std::size_t>(8, reference.width());
  const std::size_t wh = std::min<std::size_t>(8, reference.height());
  const double inv = 1.0 / static_cast<double>(ww * wh);

  double total = 0.0;
  std::size_t windows = 0;
  for (std::size_t y0 = 0; y0 + wh <= reference.height(); ++y0) {
    for (std::size_t x0 = 0; x0 + ww <= reference.width(); ++x0) {
      double ma = 0.0;
      double mb = 0.0;
      for (std::size_t y = y0; y < y0 + wh; ++y) {
        for (std::size_t x = x0; x < x0 + ww; ++x) {
          ma += reference(x, y);
          mb += test(x, y);
        }
      }
      ma *= inv;
      mb *= inv;
      double va = 0.0;
      double vb = 0.0;
      double cov = 0.0;
      for (std::size_t y = y0; y < y0 + wh; ++y) {
        for (std::size_t x = x0; x < x0 + ww; ++x) {
          const double da = reference(x, y) - ma;
          const double db = test(x, y) - mb;
          va += da * da;
          vb += db * db;
          cov += da * db;
        }
      }
      va *= inv;
      vb *= inv;
      cov *= inv;
      total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

}  // namespace mvlci
