#include "gdc/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace gdc {

namespace {

// FFTW plans are not thread-safe to create; executions through the new-array
// interface are.  Plans are cached per (h,w) and built with FFTW_UNALIGNED so
// they apply to any caller buffer.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex plan_mutex;
std::map<std::pair<int, int>, PlanPair>& plan_cache() {
  static std::map<std::pair<int, int>, PlanPair> cache;
  return cache;
}

PlanPair get_plans(int h, int w) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find({h, w});
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> scratch(static_cast<size_t>(h) * w);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  PlanPair p;
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p.fwd = fftw_plan_dft_2d(h, w, buf, buf, FFTW_FORWARD, flags);
  p.bwd = fftw_plan_dft_2d(h, w, buf, buf, FFTW_BACKWARD, flags);
  if (!p.fwd || !p.bwd) throw Error(errc::internal, "fftw plan creation failed");
  cache[{h, w}] = p;
  return p;
}

void execute(fftw_plan plan, std::complex<double>* buf) {
  auto* b = reinterpret_cast<fftw_complex*>(buf);
  fftw_execute_dft(plan, b, b);
}

}  // namespace

SpectralImage fft2(const ImageGrid& u) {
  PlanPair plans = get_plans(u.h, u.w);
  SpectralImage out(u.h, u.w, u.c);
  double scale = 1.0 / std::sqrt(static_cast<double>(u.plane()));
  for (int ch = 0; ch < u.c; ++ch) {
    std::complex<double>* p = out.data.data() + ch * out.plane();
    const double* src = u.data.data() + ch * u.plane();
    for (size_t i = 0; i < u.plane(); ++i) p[i] = src[i];
    execute(plans.fwd, p);
    for (size_t i = 0; i < u.plane(); ++i) p[i] *= scale;
  }
  return out;
}

ImageGrid ifft2(const SpectralImage& s) {
  PlanPair plans = get_plans(s.h, s.w);
  ImageGrid out(s.h, s.w, s.c);
  double scale = 1.0 / std::sqrt(static_cast<double>(s.plane()));
  std::vector<std::complex<double>> scratch(s.plane());
  for (int ch = 0; ch < s.c; ++ch) {
    std::copy_n(s.data.begin() + ch * s.plane(), s.plane(), scratch.begin());
    execute(plans.bwd, scratch.data());
    double* dst = out.data.data() + ch * out.plane();
    for (size_t i = 0; i < s.plane(); ++i) dst[i] = scratch[i].real() * scale;
  }
  return out;
}

SpectralImage kernel_otf(const BlurKernel& k, int h, int w) {
  if (k.kh > h || k.kw > w) throw DimensionError("kernel larger than image");
  PlanPair plans = get_plans(h, w);
  SpectralImage out(h, w, 1);
  // Embed with the kernel center at (0,0); taps wrap circularly.
  int ch2 = k.kh / 2, cw2 = k.kw / 2;
  for (int i = 0; i < k.kh; ++i)
    for (int j = 0; j < k.kw; ++j) {
      int ii = ((i - ch2) % h + h) % h;
      int jj = ((j - cw2) % w + w) % w;
      out.at(0, ii, jj) += k.at(i, j);
    }
  execute(plans.fwd, out.data.data());
  return out;
}

ImageGrid conv2d_circular(const ImageGrid& u, const BlurKernel& k) {
  SpectralImage otf = kernel_otf(k, u.h, u.w);
  SpectralImage su = fft2(u);
  for (int ch = 0; ch < su.c; ++ch)
    for (size_t i = 0; i < su.plane(); ++i)
      su.data[ch * su.plane() + i] *= otf.data[i];
  return ifft2(su);
}

ImageGrid corr2d_circular(const ImageGrid& u, const BlurKernel& k) {
  SpectralImage otf = kernel_otf(k, u.h, u.w);
  SpectralImage su = fft2(u);
  for (int ch = 0; ch < su.c; ++ch)
    for (size_t i = 0; i < su.plane(); ++i)
      su.data[ch * su.plane() + i] *= std::conj(otf.data[i]);
  return ifft2(su);
}

double min_abs2(const SpectralImage& s) {
  double m = std::norm(s.data[0]);
  for (const auto& v : s.data) m = std::min(m, std::norm(v));
  return m;
}

double max_abs2(const SpectralImage& s) {
  double m = 0.0;
  for (const auto& v : s.data) m = std::max(m, std::norm(v));
  return m;
}

}  // namespace gdc
