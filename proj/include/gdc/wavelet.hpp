#pragma once

#include "gdc/image.hpp"

namespace gdc {

// Orthonormal Haar transform, multi-level, stored in the usual nested-quadrant
// layout (approximation block in the top-left, detail bands around it).  Both
// image sides must be divisible by 2^levels.  The transform is exactly
// orthonormal: idwt(dwt(u)) == u and norms are preserved.
ImageGrid dwt_haar(const ImageGrid& u, int levels);
ImageGrid idwt_haar(const ImageGrid& coeffs, int levels);

// Largest level count admissible for an h x w grid (at most `cap`).
int max_wavelet_levels(int h, int w, int cap = 2);

}  // namespace gdc
