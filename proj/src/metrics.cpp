#include "gdc/metrics.hpp"

#include <cmath>
#include <limits>

namespace gdc {

double mse(const ImageGrid& u, const ImageGrid& ref) {
  if (!u.same_shape(ref)) throw DimensionError("metric inputs must share shape");
  double s = 0.0;
  for (size_t i = 0; i < u.data.size(); ++i) {
    double d = u.data[i] - ref.data[i];
    s += d * d;
  }
  return s / static_cast<double>(u.data.size());
}

double psnr(const ImageGrid& u, const ImageGrid& ref) {
  double m = mse(u, ref);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

double ssim(const ImageGrid& u, const ImageGrid& ref) {
  if (!u.same_shape(ref)) throw DimensionError("metric inputs must share shape");
  const int win = 8;
  if (u.h < win || u.w < win) throw DimensionError("image smaller than the 8x8 ssim window");
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const double n = win * win;
  double total = 0.0;
  long count = 0;
  for (int ch = 0; ch < u.c; ++ch)
    for (int i = 0; i + win <= u.h; ++i)
      for (int j = 0; j + win <= u.w; ++j) {
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (int a = 0; a < win; ++a)
          for (int b = 0; b < win; ++b) {
            double x = u.at(ch, i + a, j + b), y = ref.at(ch, i + a, j + b);
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
          }
        double mx = sx / n, my = sy / n;
        double vx = sxx / n - mx * mx;
        double vy = syy / n - my * my;
        double cov = sxy / n - mx * my;
        double val = ((2 * mx * my + c1) * (2 * cov + c2)) /
                     ((mx * mx + my * my + c1) * (vx + vy + c2));
        total += val;
        ++count;
      }
  return total / count;
}

}  // namespace gdc
