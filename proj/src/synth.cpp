#include "gdc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "gdc/fft.hpp"

namespace gdc {

ImageGrid synth_scene(uint64_t seed, uint64_t index, int h, int w) {
  Rng rng(seed, "scene", index);
  ImageGrid u(h, w, 1);
  // Shaded background.
  double base = rng.uniform(0.25, 0.65);
  double gx = rng.uniform(-0.2, 0.2), gy = rng.uniform(-0.2, 0.2);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      u.at(0, i, j) = base + gx * (static_cast<double>(j) / w - 0.5) +
                      gy * (static_cast<double>(i) / h - 0.5);
  // Flat shapes provide edges.
  int shapes = 3 + static_cast<int>(rng.below(5));
  for (int s = 0; s < shapes; ++s) {
    double val = rng.uniform(0.08, 0.92);
    bool ellipse = rng.uniform() < 0.5;
    int ci = static_cast<int>(rng.below(h)), cj = static_cast<int>(rng.below(w));
    int ri = 2 + static_cast<int>(rng.below(std::max(2, h / 4)));
    int rj = 2 + static_cast<int>(rng.below(std::max(2, w / 4)));
    for (int i = std::max(0, ci - ri); i < std::min(h, ci + ri); ++i)
      for (int j = std::max(0, cj - rj); j < std::min(w, cj + rj); ++j) {
        if (ellipse) {
          double di = (i - ci) / static_cast<double>(ri);
          double dj = (j - cj) / static_cast<double>(rj);
          if (di * di + dj * dj > 1.0) continue;
        }
        u.at(0, i, j) = val;
      }
  }
  // Soft texture keeps spectra generic.
  double fx = rng.uniform(1.0, 4.0), fy = rng.uniform(1.0, 4.0), ph = rng.uniform(0.0, 6.28);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      double t = 0.02 * std::sin(2.0 * M_PI * (fx * j / w + fy * i / h) + ph);
      u.at(0, i, j) = std::clamp(u.at(0, i, j) + t, 0.05, 0.95);
    }
  return u;
}

BlurKernel synth_motion_kernel(uint64_t seed, uint64_t index, int size) {
  Rng rng(seed, "kernel", index);
  BlurKernel k(size, size, 0.0);
  double i = size / 2.0, j = size / 2.0;
  double angle = rng.uniform(0.0, 2.0 * M_PI);
  int steps = 3 * size;
  for (int s = 0; s < steps; ++s) {
    int ii = std::clamp(static_cast<int>(i), 0, size - 1);
    int jj = std::clamp(static_cast<int>(j), 0, size - 1);
    k.at(ii, jj) += 1.0;
    angle += rng.normal(0.0, 0.35);
    i += 0.5 * std::sin(angle);
    j += 0.5 * std::cos(angle);
    i = std::clamp(i, 0.0, size - 1.0);
    j = std::clamp(j, 0.0, size - 1.0);
  }
  k.project_simplex();
  return k;
}

ImageGrid synth_text_mask(uint64_t seed, uint64_t index, int h, int w) {
  Rng rng(seed, "mask", index);
  ImageGrid m(h, w, 1, 1.0);
  int strokes = 6 + static_cast<int>(rng.below(6));
  for (int s = 0; s < strokes; ++s) {
    double i = static_cast<double>(rng.below(h));
    double j = static_cast<double>(rng.below(w));
    double angle = rng.uniform(0.0, 2.0 * M_PI);
    int len = 5 + static_cast<int>(rng.below(std::max(6, w / 2)));
    for (int t = 0; t < len; ++t) {
      int ii = static_cast<int>(i), jj = static_cast<int>(j);
      if (ii < 0 || ii >= h || jj < 0 || jj >= w) break;
      m.at(0, ii, jj) = 0.0;
      if (jj + 1 < w) m.at(0, ii, jj + 1) = 0.0;  // stroke thickness 2
      angle += rng.normal(0.0, 0.25);
      i += std::sin(angle);
      j += std::cos(angle);
    }
  }
  return m;
}

ImageGrid add_noise(const ImageGrid& u, double sigma, Rng& rng) {
  ImageGrid out = u;
  for (double& v : out.data) v += sigma * rng.normal();
  return out;
}

void synth_dataset(const SynthOptions& opt, const std::string& dir) {
  if (opt.count < 1 || opt.height < 8 || opt.width < 8)
    throw InvalidInput("synth needs count >= 1 and size >= 8");
  if (opt.kind != "noise" && opt.kind != "blur" && opt.kind != "mask" && opt.kind != "text_mask")
    throw InvalidInput("unknown synth kind: " + opt.kind);
  if (!(opt.sigma >= 0.0)) throw InvalidInput("sigma must be nonnegative");
  if (!(opt.missing >= 0.0 && opt.missing < 1.0)) throw InvalidInput("missing rate must be in [0,1)");
  std::filesystem::create_directories(dir + "/gt");

  char name[64];
  for (int idx = 0; idx < opt.count; ++idx) {
    ImageGrid gt = synth_scene(opt.seed, idx, opt.height, opt.width);
    Rng noise_rng(opt.seed, "noise", idx);
    std::snprintf(name, sizeof(name), "img_%03d", idx);
    std::string stem = dir + "/" + name;
    save_image(gt, dir + "/gt/" + name + ".pgm");

    if (opt.kind == "noise") {
      save_image(clamp01(add_noise(gt, opt.sigma, noise_rng)), stem + ".pgm");
    } else if (opt.kind == "blur") {
      BlurKernel k = opt.kernel_kind == "motion"
                         ? synth_motion_kernel(opt.seed, idx, opt.kernel_size)
                         : gaussian_kernel(opt.kernel_size, opt.kernel_size, opt.kernel_sigma);
      ImageGrid y = conv2d_circular(gt, k);
      save_image(clamp01(add_noise(y, opt.sigma, noise_rng)), stem + ".pgm");
      save_kernel(k, stem + ".kernel");
    } else {
      ImageGrid mask;
      if (opt.kind == "mask") {
        Rng mask_rng(opt.seed, "mask", idx);
        mask = ImageGrid(opt.height, opt.width, 1);
        for (double& v : mask.data) v = mask_rng.uniform() >= opt.missing ? 1.0 : 0.0;
      } else {
        mask = synth_text_mask(opt.seed, idx, opt.height, opt.width);
      }
      ImageGrid y = add_noise(gt, opt.sigma, noise_rng);
      for (size_t i = 0; i < y.data.size(); ++i) y.data[i] *= mask.data[i];
      save_image(clamp01(y), stem + ".pgm");
      save_image(mask, stem + ".mask.pgm");
    }
  }
}

}  // namespace gdc
