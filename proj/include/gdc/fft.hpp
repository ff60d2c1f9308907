#pragma once

#include <complex>
#include <vector>

#include "gdc/image.hpp"

namespace gdc {

// Per-channel 2-D spectrum, same channel-major layout as ImageGrid.
struct SpectralImage {
  int h = 0, w = 0, c = 1;
  std::vector<std::complex<double>> data;

  SpectralImage() = default;
  SpectralImage(int h_, int w_, int c_ = 1)
      : h(h_), w(w_), c(c_), data(static_cast<size_t>(h_) * w_ * c_) {}

  std::complex<double>& at(int ch, int i, int j) {
    return data[(static_cast<size_t>(ch) * h + i) * w + j];
  }
  std::complex<double> at(int ch, int i, int j) const {
    return data[(static_cast<size_t>(ch) * h + i) * w + j];
  }
  size_t plane() const { return static_cast<size_t>(h) * w; }
  bool same_shape(const SpectralImage& o) const { return h == o.h && w == o.w && c == o.c; }
};

// Unitary DFT pair: ifft2(fft2(u)) == u and energy is preserved
// (||fft2(u)|| == ||u||).
SpectralImage fft2(const ImageGrid& u);
ImageGrid ifft2(const SpectralImage& s);

// Unnormalized transfer function of a blur kernel embedded at the origin with
// circular wrap (kernel center maps to pixel (0,0)).  With the unitary pair
// above, fft2(conv2d_circular(u,k)) == otf .* fft2(u) holds exactly.
SpectralImage kernel_otf(const BlurKernel& k, int h, int w);

// Circular 2-D convolution, computed spectrally.
ImageGrid conv2d_circular(const ImageGrid& u, const BlurKernel& k);
// Correlation with the kernel (adjoint of conv2d_circular).
ImageGrid corr2d_circular(const ImageGrid& u, const BlurKernel& k);

double min_abs2(const SpectralImage& s);  // min over entries of |.|^2
double max_abs2(const SpectralImage& s);

}  // namespace gdc
