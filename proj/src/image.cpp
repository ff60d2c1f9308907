#include "gdc/image.hpp"

#include <algorithm>
#include <cmath>

namespace gdc {

ImageGrid::ImageGrid(int h_, int w_, int c_, double fill)
    : h(h_), w(w_), c(c_), data(static_cast<size_t>(h_) * w_ * c_, fill) {
  if (h_ <= 0 || w_ <= 0 || c_ <= 0) throw DimensionError("image dimensions must be positive");
}

ImageGrid ImageGrid::channel(int ch) const {
  if (ch < 0 || ch >= c) throw DimensionError("channel index out of range");
  ImageGrid out(h, w, 1);
  std::copy_n(data.begin() + ch * plane(), plane(), out.data.begin());
  return out;
}

void ImageGrid::set_channel(int ch, const ImageGrid& p) {
  if (ch < 0 || ch >= c) throw DimensionError("channel index out of range");
  if (p.h != h || p.w != w || p.c != 1) throw DimensionError("channel plane shape mismatch");
  std::copy_n(p.data.begin(), plane(), data.begin() + ch * plane());
}

BlurKernel::BlurKernel(int kh_, int kw_, double fill)
    : kh(kh_), kw(kw_), data(static_cast<size_t>(kh_) * kw_, fill) {
  if (kh_ <= 0 || kw_ <= 0) throw DimensionError("kernel dimensions must be positive");
  if (kh_ % 2 == 0 || kw_ % 2 == 0) throw DimensionError("kernel support must be odd");
}

double BlurKernel::sum() const {
  double s = 0.0;
  for (double v : data) s += v;
  return s;
}

void BlurKernel::project_simplex() {
  double s = 0.0;
  for (double& v : data) {
    if (!(v > 0.0)) v = 0.0;
    s += v;
  }
  if (s <= 0.0) {
    std::fill(data.begin(), data.end(), 1.0 / data.size());
    return;
  }
  for (double& v : data) v /= s;
}

BlurKernel delta_kernel(int kh, int kw) {
  BlurKernel k(kh, kw);
  k.at(kh / 2, kw / 2) = 1.0;
  return k;
}

BlurKernel gaussian_kernel(int kh, int kw, double sigma) {
  BlurKernel k(kh, kw);
  double s2 = 2.0 * sigma * sigma;
  for (int i = 0; i < kh; ++i)
    for (int j = 0; j < kw; ++j) {
      double di = i - kh / 2, dj = j - kw / 2;
      k.at(i, j) = std::exp(-(di * di + dj * dj) / s2);
    }
  k.project_simplex();
  return k;
}

double dot(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_shape(b)) throw DimensionError("dot: shape mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

double norm2_sq(const ImageGrid& a) {
  double s = 0.0;
  for (double v : a.data) s += v * v;
  return s;
}

double norm2(const ImageGrid& a) { return std::sqrt(norm2_sq(a)); }

double max_abs(const ImageGrid& a) {
  double m = 0.0;
  for (double v : a.data) m = std::max(m, std::fabs(v));
  return m;
}

bool all_finite(const ImageGrid& a) {
  for (double v : a.data)
    if (!std::isfinite(v)) return false;
  return true;
}

ImageGrid axpby(double alpha, const ImageGrid& a, double beta, const ImageGrid& b) {
  if (!a.same_shape(b)) throw DimensionError("axpby: shape mismatch");
  ImageGrid out(a.h, a.w, a.c);
  for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = alpha * a.data[i] + beta * b.data[i];
  return out;
}

void scale_add(ImageGrid& a, double alpha, const ImageGrid& b) {
  if (!a.same_shape(b)) throw DimensionError("scale_add: shape mismatch");
  for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += alpha * b.data[i];
}

ImageGrid clamp01(const ImageGrid& a) {
  ImageGrid out = a;
  for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
  return out;
}

void grad_xy(const ImageGrid& u, ImageGrid& dx, ImageGrid& dy) {
  dx = ImageGrid(u.h, u.w, u.c);
  dy = ImageGrid(u.h, u.w, u.c);
  for (int ch = 0; ch < u.c; ++ch)
    for (int i = 0; i < u.h; ++i) {
      int in = (i + 1) % u.h;
      for (int j = 0; j < u.w; ++j) {
        int jn = (j + 1) % u.w;
        dx.at(ch, i, j) = u.at(ch, i, jn) - u.at(ch, i, j);
        dy.at(ch, i, j) = u.at(ch, in, j) - u.at(ch, i, j);
      }
    }
}

ImageGrid grad_pair(const ImageGrid& u) {
  if (u.c != 1) throw DimensionError("grad_pair expects a single-channel image");
  ImageGrid dx, dy;
  grad_xy(u, dx, dy);
  ImageGrid out(u.h, u.w, 2);
  out.set_channel(0, dx);
  out.set_channel(1, dy);
  return out;
}

namespace {
// Catmull-Rom weight (bicubic a = -1/2).
double cubic_weight(double t) {
  t = std::fabs(t);
  if (t < 1.0) return 1.5 * t * t * t - 2.5 * t * t + 1.0;
  if (t < 2.0) return -0.5 * t * t * t + 2.5 * t * t - 4.0 * t + 2.0;
  return 0.0;
}

}  // namespace

ImageGrid resize_bicubic(const ImageGrid& u, int nh, int nw) {
  if (nh <= 0 || nw <= 0) throw DimensionError("resize target must be positive");
  if (nh == u.h && nw == u.w) return u;
  // Horizontal pass then vertical pass.
  ImageGrid tmp(u.h, nw, u.c);
  double sx = static_cast<double>(u.w) / nw;
  for (int ch = 0; ch < u.c; ++ch)
    for (int i = 0; i < u.h; ++i)
      for (int j = 0; j < nw; ++j) {
        double x = (j + 0.5) * sx - 0.5;
        int x0 = static_cast<int>(std::floor(x));
        double acc = 0.0, wsum = 0.0;
        for (int m = -1; m <= 2; ++m) {
          int xi = std::clamp(x0 + m, 0, u.w - 1);
          double wgt = cubic_weight(x - (x0 + m));
          acc += wgt * u.at(ch, i, xi);
          wsum += wgt;
        }
        tmp.at(ch, i, j) = acc / wsum;
      }
  ImageGrid out(nh, nw, u.c);
  double sy = static_cast<double>(u.h) / nh;
  for (int ch = 0; ch < u.c; ++ch)
    for (int i = 0; i < nh; ++i) {
      double y = (i + 0.5) * sy - 0.5;
      int y0 = static_cast<int>(std::floor(y));
      for (int j = 0; j < nw; ++j) {
        double acc = 0.0, wsum = 0.0;
        for (int m = -1; m <= 2; ++m) {
          int yi = std::clamp(y0 + m, 0, u.h - 1);
          double wgt = cubic_weight(y - (y0 + m));
          acc += wgt * tmp.at(ch, yi, j);
          wsum += wgt;
        }
        out.at(ch, i, j) = acc / wsum;
      }
    }
  return out;
}

BlurKernel resize_kernel(const BlurKernel& k, int nkh, int nkw) {
  ImageGrid as_img(k.kh, k.kw, 1);
  std::copy(k.data.begin(), k.data.end(), as_img.data.begin());
  ImageGrid r = resize_bicubic(as_img, nkh, nkw);
  BlurKernel out(nkh, nkw);
  std::copy(r.data.begin(), r.data.end(), out.data.begin());
  out.project_simplex();
  return out;
}

BlurKernel rescale_kernel(const BlurKernel& k, double ratio, int nkh, int nkw) {
  if (!(ratio > 0.0)) throw InvalidInput("kernel rescale ratio must be positive");
  if (nkh < 1 || nkw < 1 || nkh % 2 == 0 || nkw % 2 == 0)
    throw InvalidInput("kernel support must be positive and odd");
  // Splat each cell's mass at its geometrically scaled offset from the center;
  // bilinear weighting keeps total mass (and hence the simplex constraint)
  // intact up to boundary clipping.
  BlurKernel out(nkh, nkw);
  double c0i = (k.kh - 1) / 2.0, c0j = (k.kw - 1) / 2.0;
  double c1i = (nkh - 1) / 2.0, c1j = (nkw - 1) / 2.0;
  for (int i = 0; i < k.kh; ++i)
    for (int j = 0; j < k.kw; ++j) {
      double v = k.at(i, j);
      if (v == 0.0) continue;
      double fi = c1i + (i - c0i) * ratio;
      double fj = c1j + (j - c0j) * ratio;
      int i0 = static_cast<int>(std::floor(fi)), j0 = static_cast<int>(std::floor(fj));
      double ti = fi - i0, tj = fj - j0;
      const double wgt[2][2] = {{(1 - ti) * (1 - tj), (1 - ti) * tj},
                                {ti * (1 - tj), ti * tj}};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          int ii = i0 + a, jj = j0 + b;
          if (ii < 0 || ii >= nkh || jj < 0 || jj >= nkw) continue;
          out.at(ii, jj) += v * wgt[a][b];
        }
    }
  out.project_simplex();
  return out;
}

BlurKernel center_kernel(const BlurKernel& k, int* shift_i, int* shift_j) {
  double mass = 0.0, ci = 0.0, cj = 0.0;
  for (int i = 0; i < k.kh; ++i)
    for (int j = 0; j < k.kw; ++j) {
      double v = k.at(i, j);
      mass += v;
      ci += v * i;
      cj += v * j;
    }
  int di = 0, dj = 0;
  if (mass > 0.0) {
    di = static_cast<int>(std::lround((k.kh - 1) / 2.0 - ci / mass));
    dj = static_cast<int>(std::lround((k.kw - 1) / 2.0 - cj / mass));
  }
  if (shift_i) *shift_i = di;
  if (shift_j) *shift_j = dj;
  if (di == 0 && dj == 0) return k;
  BlurKernel out(k.kh, k.kw);
  for (int i = 0; i < k.kh; ++i)
    for (int j = 0; j < k.kw; ++j) {
      int ii = i + di, jj = j + dj;
      if (ii < 0 || ii >= k.kh || jj < 0 || jj >= k.kw) continue;
      out.at(ii, jj) = k.at(i, j);
    }
  out.project_simplex();
  return out;
}

void prune_kernel(BlurKernel& k, double rel_tol) {
  if (!(rel_tol >= 0.0)) throw InvalidInput("kernel prune tolerance must be nonnegative");
  double peak = 0.0;
  for (double v : k.data) peak = std::max(peak, v);
  if (peak <= 0.0) return;
  for (double& v : k.data)
    if (v < rel_tol * peak) v = 0.0;
  k.project_simplex();
}

ImageGrid circular_shift(const ImageGrid& u, int di, int dj) {
  ImageGrid out(u.h, u.w, u.c);
  int si = ((-di) % u.h + u.h) % u.h;
  int sj = ((-dj) % u.w + u.w) % u.w;
  for (int ch = 0; ch < u.c; ++ch)
    for (int i = 0; i < u.h; ++i) {
      int ii = (i + si) % u.h;
      for (int j = 0; j < u.w; ++j) out.at(ch, i, j) = u.at(ch, ii, (j + sj) % u.w);
    }
  return out;
}

ImageGrid binarize_mask(const ImageGrid& m) {
  ImageGrid out = m;
  for (double& v : out.data) v = v >= 0.5 ? 1.0 : 0.0;
  return out;
}

}  // namespace gdc
