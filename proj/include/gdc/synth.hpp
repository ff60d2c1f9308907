#pragma once

#include <string>

#include "gdc/image.hpp"
#include "gdc/rng.hpp"

namespace gdc {

// Synthetic degradation suites for desk-scale experiments.  One directory per
// dataset: img_%03d.pgm observations, gt/img_%03d.pgm references, and
// per-image sidecars (img_%03d.kernel, img_%03d.mask.pgm) where applicable.
struct SynthOptions {
  std::string kind = "noise";  // noise | blur | mask | text_mask
  int count = 10;
  int height = 64, width = 64;
  double sigma = 0.02;    // additive Gaussian noise level
  double missing = 0.6;   // fraction of pixels dropped by random masks
  int kernel_size = 5;
  double kernel_sigma = 1.5;
  std::string kernel_kind = "gaussian";  // gaussian | motion
  uint64_t seed = 0;
};

// Piecewise-smooth scene: shaded background plus random rectangles, ellipses
// and a soft texture; values stay inside [0.05, 0.95] so later noise is not
// clipped.
ImageGrid synth_scene(uint64_t seed, uint64_t index, int h, int w);

// Random-walk motion streak normalized onto the simplex.
BlurKernel synth_motion_kernel(uint64_t seed, uint64_t index, int size);

// Stroke mask imitating overlaid text; 0 marks missing pixels.
ImageGrid synth_text_mask(uint64_t seed, uint64_t index, int h, int w);

ImageGrid add_noise(const ImageGrid& u, double sigma, Rng& rng);

void synth_dataset(const SynthOptions& opt, const std::string& dir);

}  // namespace gdc
