#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gdc/common.hpp"

namespace gdc {

// Dense grid of doubles in [0,1] nominal range, channel-major layout
// (all of channel 0, then channel 1, ...).  Values may leave [0,1] during
// optimization; clamping happens only at 8-bit export.
struct ImageGrid {
  int h = 0, w = 0, c = 1;
  std::vector<double> data;

  ImageGrid() = default;
  ImageGrid(int h_, int w_, int c_ = 1, double fill = 0.0);

  double& at(int ch, int i, int j) { return data[(static_cast<size_t>(ch) * h + i) * w + j]; }
  double at(int ch, int i, int j) const { return data[(static_cast<size_t>(ch) * h + i) * w + j]; }
  size_t size() const { return data.size(); }
  size_t plane() const { return static_cast<size_t>(h) * w; }
  bool same_shape(const ImageGrid& o) const { return h == o.h && w == o.w && c == o.c; }

  // Single-channel view copies.
  ImageGrid channel(int ch) const;
  void set_channel(int ch, const ImageGrid& plane);
};

// 2-D blur kernel with odd support, nonnegative entries summing to 1.
struct BlurKernel {
  int kh = 0, kw = 0;
  std::vector<double> data;

  BlurKernel() = default;
  BlurKernel(int kh_, int kw_, double fill = 0.0);

  double& at(int i, int j) { return data[static_cast<size_t>(i) * kw + j]; }
  double at(int i, int j) const { return data[static_cast<size_t>(i) * kw + j]; }

  // Clamp negatives to zero and rescale to unit mass.  Degenerate (all
  // non-positive) input falls back to the uniform kernel.
  void project_simplex();
  double sum() const;
};

BlurKernel delta_kernel(int kh, int kw);
BlurKernel gaussian_kernel(int kh, int kw, double sigma);

// Elementwise helpers used throughout the solvers.
double dot(const ImageGrid& a, const ImageGrid& b);
double norm2(const ImageGrid& a);               // Euclidean norm
double norm2_sq(const ImageGrid& a);            // squared Euclidean norm
double max_abs(const ImageGrid& a);
bool all_finite(const ImageGrid& a);
ImageGrid axpby(double alpha, const ImageGrid& a, double beta, const ImageGrid& b);
void scale_add(ImageGrid& a, double alpha, const ImageGrid& b);  // a += alpha*b
ImageGrid clamp01(const ImageGrid& a);

// Forward differences with periodic wrap; dx is the horizontal difference
// u(i, j+1)-u(i, j), dy the vertical one.
void grad_xy(const ImageGrid& u, ImageGrid& dx, ImageGrid& dy);
// 2-channel pack (channel 0 = dx, channel 1 = dy) for gradient-domain solvers.
ImageGrid grad_pair(const ImageGrid& u);

// Separable Catmull-Rom resize with edge clamp.
ImageGrid resize_bicubic(const ImageGrid& u, int nh, int nw);
BlurKernel resize_kernel(const BlurKernel& k, int nkh, int nkw);

// Kernel transport between pyramid levels: splats each cell's mass at its
// center offset scaled by `ratio` (the image-size ratio, not the support
// ratio) with bilinear weights, then projects back onto the simplex.
BlurKernel rescale_kernel(const BlurKernel& k, double ratio, int nkh, int nkw);

// Translate the kernel so its mass centroid sits on the central cell; mass
// shifted past the border is dropped and the rest renormalized.  The applied
// integer shift is reported so callers can counter-shift the latent image
// (blur phase is only identifiable up to this joint translation).
BlurKernel center_kernel(const BlurKernel& k, int* shift_i = nullptr, int* shift_j = nullptr);

// Zero out entries below rel_tol * max and renormalize; stray small weights
// accumulate across alternation rounds and bias the blur estimate.
void prune_kernel(BlurKernel& k, double rel_tol);

// Periodic translation: output(i, j) = input(i - di, j - dj) with wraparound.
ImageGrid circular_shift(const ImageGrid& u, int di, int dj);

// 8-bit binary PGM (P5, 1 channel) / PPM (P6, 3 channels).
ImageGrid load_image(const std::string& path);
void save_image(const ImageGrid& u, const std::string& path);

// Plain-text kernel format: "kh kw" on the first line, then kh rows of kw
// values.  Loading projects onto the simplex.
BlurKernel load_kernel(const std::string& path);
void save_kernel(const BlurKernel& k, const std::string& path);

// Binary mask convention: pixel observed iff value >= 0.5 after load.
ImageGrid binarize_mask(const ImageGrid& m);

// Atomic text/binary file write (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace gdc
