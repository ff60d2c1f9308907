#include "gdc/wavelet.hpp"

#include <cmath>
#include <vector>

namespace gdc {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

void haar_rows(ImageGrid& a, int ch, int bh, int bw) {
  std::vector<double> tmp(bw);
  for (int i = 0; i < bh; ++i) {
    for (int j = 0; j < bw / 2; ++j) {
      double x0 = a.at(ch, i, 2 * j), x1 = a.at(ch, i, 2 * j + 1);
      tmp[j] = (x0 + x1) * kInvSqrt2;
      tmp[bw / 2 + j] = (x0 - x1) * kInvSqrt2;
    }
    for (int j = 0; j < bw; ++j) a.at(ch, i, j) = tmp[j];
  }
}

void haar_cols(ImageGrid& a, int ch, int bh, int bw) {
  std::vector<double> tmp(bh);
  for (int j = 0; j < bw; ++j) {
    for (int i = 0; i < bh / 2; ++i) {
      double x0 = a.at(ch, 2 * i, j), x1 = a.at(ch, 2 * i + 1, j);
      tmp[i] = (x0 + x1) * kInvSqrt2;
      tmp[bh / 2 + i] = (x0 - x1) * kInvSqrt2;
    }
    for (int i = 0; i < bh; ++i) a.at(ch, i, j) = tmp[i];
  }
}

void haar_rows_inv(ImageGrid& a, int ch, int bh, int bw) {
  std::vector<double> tmp(bw);
  for (int i = 0; i < bh; ++i) {
    for (int j = 0; j < bw / 2; ++j) {
      double s = a.at(ch, i, j), d = a.at(ch, i, bw / 2 + j);
      tmp[2 * j] = (s + d) * kInvSqrt2;
      tmp[2 * j + 1] = (s - d) * kInvSqrt2;
    }
    for (int j = 0; j < bw; ++j) a.at(ch, i, j) = tmp[j];
  }
}

void haar_cols_inv(ImageGrid& a, int ch, int bh, int bw) {
  std::vector<double> tmp(bh);
  for (int j = 0; j < bw; ++j) {
    for (int i = 0; i < bh / 2; ++i) {
      double s = a.at(ch, i, j), d = a.at(ch, bh / 2 + i, j);
      tmp[2 * i] = (s + d) * kInvSqrt2;
      tmp[2 * i + 1] = (s - d) * kInvSqrt2;
    }
    for (int i = 0; i < bh; ++i) a.at(ch, i, j) = tmp[i];
  }
}

void check_divisible(int h, int w, int levels) {
  if (levels < 1) throw DimensionError("wavelet levels must be >= 1");
  int f = 1 << levels;
  if (h % f != 0 || w % f != 0)
    throw DimensionError("image sides must be divisible by 2^levels for the wavelet transform");
}
}  // namespace

ImageGrid dwt_haar(const ImageGrid& u, int levels) {
  check_divisible(u.h, u.w, levels);
  ImageGrid a = u;
  for (int ch = 0; ch < a.c; ++ch) {
    int bh = a.h, bw = a.w;
    for (int l = 0; l < levels; ++l) {
      haar_rows(a, ch, bh, bw);
      haar_cols(a, ch, bh, bw);
      bh /= 2;
      bw /= 2;
    }
  }
  return a;
}

ImageGrid idwt_haar(const ImageGrid& coeffs, int levels) {
  check_divisible(coeffs.h, coeffs.w, levels);
  ImageGrid a = coeffs;
  for (int ch = 0; ch < a.c; ++ch) {
    for (int l = levels - 1; l >= 0; --l) {
      int bh = a.h >> l, bw = a.w >> l;
      haar_cols_inv(a, ch, bh, bw);
      haar_rows_inv(a, ch, bh, bw);
    }
  }
  return a;
}

int max_wavelet_levels(int h, int w, int cap) {
  int levels = 0;
  while (levels < cap && h % 2 == 0 && w % 2 == 0 && h >= 8 && w >= 8) {
    ++levels;
    h /= 2;
    w /= 2;
  }
  return levels;
}

}  // namespace gdc
