#pragma once

#include "mvlci/geometry.hpp"
#include "mvlci/image.hpp"

namespace mvlci {

double mse(const Image& reference, const Image& test);

/// 10 log10(1 / MSE) for intensities in [0, 1]; +infinity for identical
/// images.
double psnr(const Image& reference, const Image& test);

/// PSNR over the pixels selected by `region` only.
double psnr(const Image& reference, const Image& test, const Mask& region);

/// Mean SSIM over all 8x8 windows (stride 1, uniform weights), constants
/// C1 = 0.01^2 and C2 = 0.03^2. Images smaller than 8 in either dimension
/// use a single window spanning the image.
double ssim(const Image& reference, const Image& test);

}  // namespace mvlci
