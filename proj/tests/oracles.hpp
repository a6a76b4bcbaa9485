#pragma once

// Slow reference implementations used as test oracles. Nothing here calls
// the fast paths under test.

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mvlci/image.hpp"
#include "mvlci/rng.hpp"

namespace oracle {

// Sylvester Hadamard entry: (-1)^popcount(i & j).
inline int hadamard(std::uint32_t i, std::uint32_t j) {
  return (std::popcount(i & j) & 1) ? -1 : 1;
}

// Dense 0/1 sensing matrix, |rows| x columns.size().
inline std::vector<std::vector<double>> dense_sensing(const std::vector<std::uint32_t>& rows,
                                                      const std::vector<std::uint32_t>& columns) {
  std::vector<std::vector<double>> a(rows.size(), std::vector<double>(columns.size()));
  for (std::size_t m = 0; m < rows.size(); ++m) {
    for (std::size_t n = 0; n < columns.size(); ++n) {
      a[m][n] = (hadamard(rows[m], columns[n]) + 1) / 2;
    }
  }
  return a;
}

inline std::vector<double> matvec(const std::vector<std::vector<double>>& a,
                                  const std::vector<double>& x) {
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t m = 0; m < a.size(); ++m) {
    for (std::size_t n = 0; n < x.size(); ++n) y[m] += a[m][n] * x[n];
  }
  return y;
}

inline std::vector<double> matvec_t(const std::vector<std::vector<double>>& a,
                                    const std::vector<double>& y, std::size_t cols) {
  std::vector<double> x(cols, 0.0);
  for (std::size_t m = 0; m < a.size(); ++m) {
    for (std::size_t n = 0; n < cols; ++n) x[n] += a[m][n] * y[m];
  }
  return x;
}

// Bilinear sample with zero outside the grid.
inline double sample_zero(const mvlci::Image& img, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const double tx = x - fx, ty = y - fy;
  auto at = [&](double xx, double yy) {
    if (xx < 0 || yy < 0 || xx >= static_cast<double>(img.width()) ||
        yy >= static_cast<double>(img.height())) {
      return 0.0;
    }
    return img(static_cast<std::size_t>(xx), static_cast<std::size_t>(yy));
  };
  return (1 - tx) * (1 - ty) * at(fx, fy) + tx * (1 - ty) * at(fx + 1, fy) +
         (1 - tx) * ty * at(fx, fy + 1) + tx * ty * at(fx + 1, fy + 1);
}

inline mvlci::Image random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
  mvlci::SplitMix64 rng(seed);
  mvlci::Image img(w, h);
  for (double& v : img.pixels()) v = rng.uniform();
  return img;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  mvlci::SplitMix64 rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
  return v;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace oracle
