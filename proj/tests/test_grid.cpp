#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "gdc/fft.hpp"
#include "gdc/image.hpp"
#include "gdc/metrics.hpp"
#include "gdc/rng.hpp"
#include "gdc/wavelet.hpp"
#include "oracles.hpp"

using namespace gdc;

namespace {

ImageGrid random_image(int h, int w, int c, uint64_t seed, const char* stream = "init") {
  Rng rng(seed, stream);
  ImageGrid u(h, w, c);
  for (auto& v : u.data) v = rng.uniform();
  return u;
}

std::filesystem::path temp_file(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "gdc_grid_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("rng streams are deterministic and decorrelated") {
  Rng a(42, "noise"), b(42, "noise"), c(42, "mask"), d(43, "noise");
  for (int i = 0; i < 100; ++i) {
    double va = a.uniform();
    CHECK(va == b.uniform());
    CHECK(va != c.uniform());
    CHECK(va != d.uniform());
    CHECK(va >= 0.0);
    CHECK(va < 1.0);
  }
  Rng e(42, "noise", 1), f(42, "noise", 0);
  CHECK(e.uniform() != f.uniform());
}

TEST_CASE("rng normal has sane moments") {
  Rng rng(7, "noise");
  double s1 = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    s1 += x;
    s2 += x * x;
  }
  CHECK(std::fabs(s1 / n) < 0.02);
  CHECK(std::fabs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("image accessors and channel extraction") {
  ImageGrid u(3, 4, 2);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j) u.at(c, i, j) = c * 100 + i * 10 + j;
  ImageGrid ch1 = u.channel(1);
  CHECK(ch1.c == 1);
  CHECK(ch1.at(0, 2, 3) == doctest::Approx(123.0));
  ImageGrid v(3, 4, 2);
  v.set_channel(0, ch1);
  CHECK(v.at(0, 2, 3) == doctest::Approx(123.0));
}

TEST_CASE("pgm round trip preserves 8-bit data") {
  ImageGrid u = random_image(9, 7, 1, 5);
  // snap to the 8-bit lattice so the round trip is exact
  for (auto& v : u.data) v = std::round(v * 255.0) / 255.0;
  auto path = temp_file("rt.pgm");
  save_image(u, path.string());
  ImageGrid r = load_image(path.string());
  REQUIRE(r.h == u.h);
  REQUIRE(r.w == u.w);
  REQUIRE(r.c == 1);
  for (size_t i = 0; i < u.data.size(); ++i) CHECK(r.data[i] == doctest::Approx(u.data[i]).epsilon(1e-12));
}

TEST_CASE("ppm round trip preserves 8-bit data") {
  ImageGrid u = random_image(5, 6, 3, 6);
  for (auto& v : u.data) v = std::round(v * 255.0) / 255.0;
  auto path = temp_file("rt.ppm");
  save_image(u, path.string());
  ImageGrid r = load_image(path.string());
  REQUIRE(r.c == 3);
  for (size_t i = 0; i < u.data.size(); ++i) CHECK(r.data[i] == doctest::Approx(u.data[i]).epsilon(1e-12));
}

TEST_CASE("pnm loader tolerates comments") {
  auto path = temp_file("comment.pgm");
  FILE* f = std::fopen(path.string().c_str(), "wb");
  REQUIRE(f != nullptr);
  std::fputs("P5\n# a comment line\n2 2\n# another\n255\n", f);
  unsigned char px[4] = {0, 85, 170, 255};
  std::fwrite(px, 1, 4, f);
  std::fclose(f);
  ImageGrid u = load_image(path.string());
  CHECK(u.at(0, 0, 1) == doctest::Approx(85.0 / 255.0));
  CHECK(u.at(0, 1, 1) == doctest::Approx(1.0));
}

TEST_CASE("kernel text round trip and simplex projection") {
  BlurKernel k(3, 3);
  Rng rng(11, "kernel");
  for (auto& v : k.data) v = rng.uniform();
  k.project_simplex();
  double s = 0.0;
  for (double v : k.data) {
    CHECK(v >= 0.0);
    s += v;
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  auto path = temp_file("k.kernel");
  save_kernel(k, path.string());
  BlurKernel r = load_kernel(path.string());
  REQUIRE(r.kh == 3);
  REQUIRE(r.kw == 3);
  for (size_t i = 0; i < k.data.size(); ++i) CHECK(r.data[i] == doctest::Approx(k.data[i]).epsilon(1e-14));
}

TEST_CASE("simplex projection clips negatives and falls back to uniform") {
  BlurKernel k(1, 3);
  k.data = {-1.0, -2.0, -0.5};
  k.project_simplex();
  for (double v : k.data) CHECK(v == doctest::Approx(1.0 / 3.0));
  BlurKernel k2(1, 3);
  k2.data = {-1.0, 0.0, 3.0};
  k2.project_simplex();
  CHECK(k2.data[0] == 0.0);
  CHECK(k2.data[2] == doctest::Approx(1.0));
}

TEST_CASE("fft matches direct dft and is unitary") {
  ImageGrid u = random_image(6, 5, 1, 13);
  SpectralImage F = fft2(u);
  auto ref = oracle::direct_dft2(u, 0);
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 5; ++q) {
      auto got = F.at(0, p, q);
      auto want = ref[static_cast<size_t>(p) * 5 + q];
      CHECK(std::abs(got - want) < 1e-10);
    }
  // Parseval under the unitary convention
  double es = norm2_sq(u);
  double ef = 0.0;
  for (auto& z : F.data) ef += std::norm(z);
  CHECK(ef == doctest::Approx(es).epsilon(1e-12));
  // round trip
  ImageGrid back = ifft2(F);
  for (size_t i = 0; i < u.data.size(); ++i) CHECK(back.data[i] == doctest::Approx(u.data[i]).epsilon(1e-12));
}

TEST_CASE("delta kernel has flat unit spectrum") {
  BlurKernel k = delta_kernel(5, 5);
  SpectralImage K = kernel_otf(k, 8, 8);
  for (auto& z : K.data) {
    CHECK(z.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(z.imag()) < 1e-12);
  }
}

TEST_CASE("kernel otf dc equals kernel sum") {
  BlurKernel k = gaussian_kernel(5, 5, 1.2);
  SpectralImage K = kernel_otf(k, 16, 16);
  double s = 0.0;
  for (double v : k.data) s += v;
  CHECK(K.at(0, 0, 0).real() == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("spectral convolution matches spatial oracle") {
  ImageGrid u = random_image(12, 10, 2, 17);
  BlurKernel k = gaussian_kernel(5, 5, 1.0);
  ImageGrid got = conv2d_circular(u, k);
  ImageGrid want = oracle::conv_spatial(u, k);
  for (size_t i = 0; i < u.data.size(); ++i) CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-10));
}

TEST_CASE("corr2d is the adjoint of conv2d") {
  ImageGrid u = random_image(8, 8, 1, 19);
  ImageGrid v = random_image(8, 8, 1, 23);
  BlurKernel k(3, 3);
  Rng rng(29, "kernel");
  for (auto& w : k.data) w = rng.uniform();
  // <Au, v> == <u, A^T v>
  double lhs = dot(conv2d_circular(u, k), v);
  double rhs = dot(u, corr2d_circular(v, k));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("wavelet transform round-trips and preserves energy") {
  ImageGrid u = random_image(16, 16, 1, 31);
  ImageGrid w = dwt_haar(u, 2);
  CHECK(norm2_sq(w) == doctest::Approx(norm2_sq(u)).epsilon(1e-12));
  ImageGrid back = idwt_haar(w, 2);
  for (size_t i = 0; i < u.data.size(); ++i) CHECK(back.data[i] == doctest::Approx(u.data[i]).epsilon(1e-12));
}

TEST_CASE("wavelet analysis matches dense matrix oracle") {
  const int h = 8, w = 8, levels = 2;
  ImageGrid u = random_image(h, w, 1, 37);
  ImageGrid got = dwt_haar(u, levels);
  Eigen::MatrixXd B = oracle::haar_operator_dense(h, w, levels);
  Eigen::VectorXd want = B * oracle::to_vector(u);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) CHECK(got.at(0, i, j) == doctest::Approx(want(i * w + j)).epsilon(1e-11));
  // orthonormality of the dense operator itself
  Eigen::MatrixXd I = B * B.transpose();
  CHECK((I - Eigen::MatrixXd::Identity(h * w, h * w)).norm() < 1e-10);
}

TEST_CASE("max_wavelet_levels respects size constraints") {
  CHECK(max_wavelet_levels(16, 16) == 2);
  CHECK(max_wavelet_levels(16, 16, 1) == 1);
  CHECK(max_wavelet_levels(10, 16) == 1);
  CHECK(max_wavelet_levels(7, 16) == 0);
}

TEST_CASE("gradients wrap periodically") {
  ImageGrid u(2, 3, 1);
  u.data = {1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
  ImageGrid dx, dy;
  grad_xy(u, dx, dy);
  CHECK(dx.at(0, 0, 0) == doctest::Approx(1.0));   // 2 - 1
  CHECK(dx.at(0, 0, 2) == doctest::Approx(-3.0));  // wrap: 1 - 4
  CHECK(dy.at(0, 0, 0) == doctest::Approx(7.0));   // 8 - 1
  CHECK(dy.at(0, 1, 0) == doctest::Approx(-7.0));  // wrap: 1 - 8
  ImageGrid pair = grad_pair(u);
  CHECK(pair.c == 2);
  CHECK(pair.at(0, 0, 2) == doctest::Approx(-3.0));
  CHECK(pair.at(1, 1, 0) == doctest::Approx(-7.0));
}

TEST_CASE("bicubic resize reproduces constants and is exact at identity") {
  ImageGrid u(12, 12, 1);
  for (auto& v : u.data) v = 0.625;
  ImageGrid small = resize_bicubic(u, 7, 9);
  for (double v : small.data) CHECK(v == doctest::Approx(0.625).epsilon(1e-12));
  ImageGrid same = resize_bicubic(u, 12, 12);
  for (size_t i = 0; i < u.data.size(); ++i) CHECK(same.data[i] == doctest::Approx(u.data[i]).epsilon(1e-12));
}

TEST_CASE("kernel resize keeps simplex membership") {
  BlurKernel k = gaussian_kernel(7, 7, 1.5);
  BlurKernel r = resize_kernel(k, 5, 5);
  double s = 0.0;
  for (double v : r.data) {
    CHECK(v >= 0.0);
    s += v;
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("psnr and ssim behave on known cases") {
  ImageGrid a = random_image(16, 16, 1, 41);
  CHECK(std::isinf(psnr(a, a)));
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  ImageGrid b = a;
  for (auto& v : b.data) v = std::min(1.0, v + 0.1);
  double m = mse(a, b);
  CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(1.0 / m)).epsilon(1e-12));
  CHECK(ssim(a, b) < 1.0);
}

TEST_CASE("binarize mask thresholds at one half") {
  ImageGrid u(1, 4, 1);
  u.data = {0.0, 0.49, 0.5, 1.0};
  ImageGrid m = binarize_mask(u);
  CHECK(m.data[0] == 0.0);
  CHECK(m.data[1] == 0.0);
  CHECK(m.data[2] == 1.0);
  CHECK(m.data[3] == 1.0);
}
