#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mvlci/metrics.hpp"
#include "oracles.hpp"

using namespace mvlci;

namespace {

// SSIM from raw moments, one 8x8 window at a time.
double ssim_oracle(const Image& a, const Image& b) {
  const double c1 = 1e-4, c2 = 9e-4;
  double total = 0.0;
  int count = 0;
  for (std::size_t y0 = 0; y0 + 8 <= a.height(); ++y0) {
    for (std::size_t x0 = 0; x0 + 8 <= a.width(); ++x0) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (std::size_t y = y0; y < y0 + 8; ++y) {
        for (std::size_t x = x0; x < x0 + 8; ++x) {
          sa += a(x, y);
          sb += b(x, y);
          saa += a(x, y) * a(x, y);
          sbb += b(x, y) * b(x, y);
          sab += a(x, y) * b(x, y);
        }
      }
      const double n = 64.0;
      const double ma = sa / n, mb = sb / n;
      const double va = saa / n - ma * ma, vb = sbb / n - mb * mb, cov = sab / n - ma * mb;
      total += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return total / count;
}

}  // namespace

TEST_CASE("identical images") {
  const Image a = oracle::random_image(16, 12, 1);
  CHECK(std::isinf(psnr(a, a)));
  CHECK(psnr(a, a) > 0.0);
  CHECK(ssim(a, a) == 1.0);
}

TEST_CASE("closed-form PSNR") {
  CHECK(mse(Image(8, 8, 0.0), Image(8, 8, 0.1)) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(psnr(Image(8, 8, 0.0), Image(8, 8, 0.1)) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("MSE matches a direct double loop") {
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const Image a = oracle::random_image(13, 9, s), b = oracle::random_image(13, 9, s + 50);
    double acc = 0.0;
    for (std::size_t y = 0; y < 9; ++y) {
      for (std::size_t x = 0; x < 13; ++x) acc += (a(x, y) - b(x, y)) * (a(x, y) - b(x, y));
    }
    CHECK(std::abs(mse(a, b) - acc / (13 * 9)) < 1e-12);
  }
}

TEST_CASE("region PSNR only counts masked pixels") {
  Image ref(4, 4, 0.5), test(4, 4, 0.5);
  test(3, 3) = 0.0;
  Mask region(4, 4, true);
  region.bits[15] = 0;
  CHECK(std::isinf(psnr(ref, test, region)));
  CHECK(std::isfinite(psnr(ref, test)));
  CHECK_THROWS_AS(psnr(ref, test, Mask(4, 4, false)), Error);
  CHECK_THROWS_AS(psnr(ref, test, Mask(3, 4, true)), Error);
}

TEST_CASE("SSIM matches the moment oracle") {
  const Image a = oracle::random_image(20, 14, 3);
  Image b = a;
  for (std::size_t i = 0; i < b.size(); i += 3) b.pixels()[i] *= 0.6;
  CHECK(ssim(a, b) == doctest::Approx(ssim_oracle(a, b)).epsilon(1e-10));
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-14));
  CHECK(ssim(a, b) < 1.0);
  CHECK(ssim(a, oracle::random_image(20, 14, 4)) < 0.2);
}

TEST_CASE("dimension mismatches throw") {
  CHECK_THROWS_AS(mse(Image(4, 4), Image(4, 5)), Error);
  CHECK_THROWS_AS(ssim(Image(8, 8), Image(9, 8)), Error);
}
