#include <Eigen/Dense>
#include <filesystem>

#include "doctest.h"
#include "gdc/neural.hpp"
#include "gdc/rng.hpp"
#include "oracles.hpp"

using namespace gdc;

namespace {

ImageGrid random_image(int h, int w, int c, uint64_t seed) {
  Rng rng(seed, "init");
  ImageGrid u(h, w, c);
  for (auto& v : u.data) v = rng.uniform();
  return u;
}

// Independent application of one layer's linearity (no bias, no activation):
// tap w[o][ic][3a+b] multiplies x(ic, i+a-1, j+b-1) with circular wrap.
ImageGrid layer_apply_oracle(const ConvLayer& L, const ImageGrid& x) {
  ImageGrid out(x.h, x.w, L.out_ch);
  for (int o = 0; o < L.out_ch; ++o)
    for (int i = 0; i < x.h; ++i)
      for (int j = 0; j < x.w; ++j) {
        double acc = 0.0;
        for (int ic = 0; ic < L.in_ch; ++ic)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              int ii = (i + a - 1 + x.h) % x.h;
              int jj = (j + b - 1 + x.w) % x.w;
              acc += L.w[(static_cast<size_t>(o) * L.in_ch + ic) * 9 + 3 * a + b] * x.at(ic, ii, jj);
            }
        out.at(o, i, j) = acc;
      }
  return out;
}

// Dense matrix of that operator for SVD cross-checks.
Eigen::MatrixXd layer_matrix(const ConvLayer& L, int h, int w) {
  const int ncols = h * w * L.in_ch, nrows = h * w * L.out_ch;
  Eigen::MatrixXd A(nrows, ncols);
  for (int col = 0; col < ncols; ++col) {
    ImageGrid e(h, w, L.in_ch);
    e.data[col] = 1.0;
    ImageGrid out = layer_apply_oracle(L, e);
    for (int row = 0; row < nrows; ++row) A(row, col) = out.data[row];
  }
  return A;
}

std::filesystem::path temp_file(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "gdc_neural_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("untrained generative module is the identity map") {
  ConvNetModule gm = ConvNetModule::make_generative(1, 5, 8, 123);
  ImageGrid u = random_image(10, 9, 1, 1);
  ImageGrid out = gm.gm_apply(u);
  for (size_t i = 0; i < u.data.size(); ++i) CHECK(out.data[i] == u.data[i]);
  ImageGrid pert = gm.perturbation(u);
  for (double v : pert.data) CHECK(v == 0.0);
}

TEST_CASE("module construction fixes shapes and seeds") {
  ConvNetModule gm = ConvNetModule::make_generative(2, 4, 6, 9);
  CHECK(gm.in_channels() == 2);
  CHECK(gm.out_channels() == 2);
  CHECK(gm.layers().size() == 4);
  CHECK(gm.layers().front().relu);
  CHECK_FALSE(gm.layers().back().relu);
  ConvNetModule dm = ConvNetModule::make_discriminative(2, 3, 6, 9);
  CHECK(dm.out_channels() == 1);
  // same seed -> identical weights
  ConvNetModule gm2 = ConvNetModule::make_generative(2, 4, 6, 9);
  for (size_t l = 0; l < gm.layers().size(); ++l)
    CHECK(gm.layers()[l].w == gm2.layers()[l].w);
}

TEST_CASE("discriminative score gradient matches finite differences") {
  ConvNetModule dm = ConvNetModule::make_discriminative(1, 3, 4, 17);
  // give the last layer nonzero weights so the score is nontrivial
  Rng rng(18, "init");
  for (auto& w : dm.layers().back().w) w = rng.normal() * 0.3;
  ImageGrid u = random_image(8, 8, 1, 2);
  ImageGrid g = dm.score_input_grad(u);
  Rng pick(19, "probe");
  for (int t = 0; t < 12; ++t) {
    size_t idx = pick.below(u.data.size());
    ImageGrid up = u, dn = u;
    const double h = 1e-5;
    up.data[idx] += h;
    dn.data[idx] -= h;
    double fd = (dm.score(up) - dm.score(dn)) / (2.0 * h);
    CHECK(g.data[idx] == doctest::Approx(fd).epsilon(2e-4));
  }
}

TEST_CASE("dm_apply moves against the score gradient") {
  ConvNetModule dm = ConvNetModule::make_discriminative(1, 3, 4, 21);
  Rng rng(22, "init");
  for (auto& w : dm.layers().back().w) w = rng.normal() * 0.3;
  ImageGrid u = random_image(8, 8, 1, 3);
  double alpha = 0.05;
  ImageGrid moved = dm.dm_apply(u, alpha);
  ImageGrid g = dm.score_input_grad(u);
  for (size_t i = 0; i < u.data.size(); ++i)
    CHECK(moved.data[i] == doctest::Approx(u.data[i] - alpha * g.data[i]).epsilon(1e-12));
  // and the score actually decreases for a small step
  CHECK(dm.score(moved) < dm.score(u));
}

TEST_CASE("layer operator norm agrees with dense svd") {
  ConvNetModule gm = ConvNetModule::make_generative(1, 3, 3, 31);
  const int h = 8, w = 8;
  for (int l = 0; l < 2; ++l) {  // skip the zero-initialized last layer
    Eigen::MatrixXd A = layer_matrix(gm.layers()[l], h, w);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    double want = svd.singularValues()(0);
    double got = gm.layer_operator_norm(l, h, w);
    CHECK(got == doctest::Approx(want).epsilon(1e-4));
  }
  // zero layer reports zero
  CHECK(gm.layer_operator_norm(2, h, w) == 0.0);
}

TEST_CASE("matrix operator norm matches eigen svd") {
  Rng rng(33, "probe");
  for (int trial = 0; trial < 5; ++trial) {
    int rows = 10 + trial, cols = 8 + trial;
    std::vector<double> a(static_cast<size_t>(rows) * cols);
    for (auto& v : a) v = rng.normal();
    Eigen::MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) M(i, j) = a[static_cast<size_t>(i) * cols + j];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    CHECK(matrix_operator_norm(a, rows, cols) ==
          doctest::Approx(svd.singularValues()(0)).epsilon(1e-6));
  }
}

TEST_CASE("spectral normalization hits the per-layer target") {
  ConvNetModule gm = ConvNetModule::make_generative(1, 4, 6, 41);
  // make the last layer nonzero so all layers participate
  Rng rng(42, "init");
  for (auto& w : gm.layers().back().w) w = rng.normal() * 0.2;
  const double target = 0.9;
  const int K = static_cast<int>(gm.layers().size());
  gm.spectral_normalize(target, 16, 16);
  double prod = 1.0;
  for (int l = 0; l < K; ++l) {
    double n = gm.layer_operator_norm(l, 16, 16);
    CHECK(n == doctest::Approx(std::pow(target, 1.0 / K)).epsilon(1e-4));
    prod *= n;
  }
  CHECK(prod == doctest::Approx(target).epsilon(1e-3));
}

TEST_CASE("normalized perturbation map respects its lipschitz budget") {
  ConvNetModule gm = ConvNetModule::make_generative(1, 3, 4, 51);
  Rng rng(52, "init");
  for (auto& w : gm.layers().back().w) w = rng.normal() * 0.5;
  gm.spectral_normalize(0.8, 16, 16);
  LipschitzReport rep = gm.estimate_lipschitz(200, 7, 0.1, 16, 16);
  CHECK(rep.max_ratio <= 0.8 + 1e-3);
  CHECK(rep.max_ratio > 0.0);
  CHECK(rep.bin_edges.size() == 21);
  CHECK(rep.counts.size() == 20);
  int total = 0;
  for (int c : rep.counts) total += c;
  CHECK(total == 200);
}

TEST_CASE("generative training reduces loss and is deterministic") {
  // tiny denoising corpus: clean constants, additive noise
  std::vector<ImageGrid> noisy, clean;
  Rng rng(61, "noise");
  for (int s = 0; s < 8; ++s) {
    ImageGrid c(8, 8, 1);
    for (auto& v : c.data) v = 0.2 + 0.08 * s;
    ImageGrid n = c;
    for (auto& v : n.data) v += rng.normal() * 0.05;
    clean.push_back(c);
    noisy.push_back(n);
  }
  TrainOptions opt;
  opt.epochs = 20;
  opt.step_size = 0.05;
  opt.seed = 5;
  ConvNetModule gm = ConvNetModule::make_generative(1, 3, 4, 71);
  TrainReport rep = gm.train_generative(noisy, clean, opt);
  REQUIRE(rep.epoch_loss.size() == 20);
  CHECK(rep.epoch_loss.back() < rep.epoch_loss.front());

  ConvNetModule gm2 = ConvNetModule::make_generative(1, 3, 4, 71);
  TrainReport rep2 = gm2.train_generative(noisy, clean, opt);
  CHECK(rep.epoch_loss == rep2.epoch_loss);
}

TEST_CASE("discriminative training separates easy classes") {
  std::vector<ImageGrid> samples;
  std::vector<int> labels;
  Rng rng(81, "noise");
  for (int s = 0; s < 16; ++s) {
    ImageGrid u(8, 8, 1);
    bool noisy = (s % 2 == 0);
    for (auto& v : u.data) v = 0.5 + (noisy ? rng.normal() * 0.25 : 0.0);
    samples.push_back(u);
    labels.push_back(noisy ? 1 : 0);
  }
  TrainOptions opt;
  opt.epochs = 60;
  opt.step_size = 0.1;
  ConvNetModule dm = ConvNetModule::make_discriminative(1, 3, 6, 91);
  TrainReport rep = dm.train_discriminative(samples, labels, opt);
  CHECK(rep.accuracy >= 0.9);
  CHECK(rep.epoch_loss.back() < rep.epoch_loss.front());
}

TEST_CASE("divergent training reports a training error") {
  std::vector<ImageGrid> noisy(2, ImageGrid(8, 8, 1)), clean(2, ImageGrid(8, 8, 1));
  for (auto& u : noisy)
    for (auto& v : u.data) v = 1.0;
  TrainOptions opt;
  opt.epochs = 200;
  opt.step_size = 1e6;  // guaranteed blow-up
  ConvNetModule gm = ConvNetModule::make_generative(1, 3, 4, 99);
  Rng rng(100, "init");
  for (auto& w : gm.layers().back().w) w = rng.normal();
  CHECK_THROWS_AS(gm.train_generative(noisy, clean, opt), TrainingError);
}

TEST_CASE("checkpoint round trip preserves behavior bit-exactly") {
  ConvNetModule gm = ConvNetModule::make_generative(2, 4, 6, 111);
  Rng rng(112, "init");
  for (auto& w : gm.layers().back().w) w = rng.normal() * 0.1;
  auto path = temp_file("gm.gdcw");
  gm.save(path.string());
  ConvNetModule r = ConvNetModule::load(path.string());
  CHECK(r.role() == ModuleRole::generative);
  ImageGrid u = random_image(9, 7, 2, 4);
  ImageGrid a = gm.gm_apply(u), b = r.gm_apply(u);
  for (size_t i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);
}

TEST_CASE("corrupt checkpoints are rejected") {
  auto path = temp_file("bad.gdcw");
  write_file_atomic(path.string(), "NOPE this is not a checkpoint");
  CHECK_THROWS_AS(ConvNetModule::load(path.string()), InvalidInput);
}

TEST_CASE("channel mismatch is rejected") {
  ConvNetModule gm = ConvNetModule::make_generative(1, 3, 4, 121);
  ImageGrid u(8, 8, 3);
  CHECK_THROWS_AS(gm.gm_apply(u), InvalidInput);
}
