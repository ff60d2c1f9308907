#pragma once

#include "gdc/image.hpp"

namespace gdc {

double mse(const ImageGrid& u, const ImageGrid& ref);

// Peak signal-to-noise ratio against a [0,1]-range reference; identical
// images give +infinity.
double psnr(const ImageGrid& u, const ImageGrid& ref);

// Mean structural similarity over sliding 8x8 uniform windows
// (C1 = 0.01^2, C2 = 0.03^2), averaged across channels.
double ssim(const ImageGrid& u, const ImageGrid& ref);

}  // namespace gdc
