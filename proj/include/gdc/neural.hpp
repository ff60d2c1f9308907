#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdc/image.hpp"
#include "gdc/rng.hpp"

namespace gdc {

enum class ModuleRole : uint32_t { generative = 0, discriminative = 1 };

// One 3x3 convolution layer with circular padding and optional ReLU.
struct ConvLayer {
  int in_ch = 1, out_ch = 1;
  int kh = 3, kw = 3;
  bool relu = true;
  std::vector<double> w;  // [out][in][kh][kw]
  std::vector<double> b;  // [out]

  size_t w_count() const { return static_cast<size_t>(in_ch) * out_ch * kh * kw; }
};

struct TrainOptions {
  int epochs = 30;
  double step_size = 0.05;
  uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean per-sample loss, one entry per epoch
  double accuracy = -1.0;          // classification accuracy (discriminative only)
};

struct LipschitzReport {
  double max_ratio = 0.0;
  std::vector<double> bin_edges;  // len = bins + 1
  std::vector<int> counts;        // len = bins
};

// Plain convolutional module used both as the generative denoiser (predicts a
// residual added to its input) and as the discriminative scorer (predicts a
// noisiness score; its input gradient drives a correction step).
class ConvNetModule {
public:
  // depth counts conv layers; every layer but the last carries a ReLU.
  static ConvNetModule make_generative(int channels, int depth, int width, uint64_t seed);
  static ConvNetModule make_discriminative(int channels, int depth, int width, uint64_t seed);

  ModuleRole role() const { return role_; }
  int in_channels() const { return layers_.front().in_ch; }
  int out_channels() const { return layers_.back().out_ch; }
  const std::vector<ConvLayer>& layers() const { return layers_; }
  std::vector<ConvLayer>& layers() { return layers_; }

  // Raw network output (residual maps, or the pre-pooling score map).
  ImageGrid forward(const ImageGrid& u) const;
  // Discriminative score: global average of the final 1-channel map.
  double score(const ImageGrid& u) const;
  ImageGrid score_input_grad(const ImageGrid& u) const;

  // Perturbation map N(u): the learned displacement this module adds.
  ImageGrid perturbation(const ImageGrid& u, double alpha_d = 0.1) const;
  // u + residual.
  ImageGrid gm_apply(const ImageGrid& u) const;
  // u - alpha_d * d(score)/du.
  ImageGrid dm_apply(const ImageGrid& u, double alpha_d = 0.1) const;

  // Stochastic gradient training, one sample at a time in corpus order;
  // deterministic for a fixed seed.  Throws TrainingError on non-finite loss.
  // Generative: mean-squared error between the residual and (clean - noisy).
  TrainReport train_generative(const std::vector<ImageGrid>& noisy,
                               const std::vector<ImageGrid>& clean, const TrainOptions& opt);
  // Discriminative: logistic loss on labels (1 = degraded, 0 = clean).
  TrainReport train_discriminative(const std::vector<ImageGrid>& samples,
                                   const std::vector<int>& labels, const TrainOptions& opt);

  // Per-sample loss with analytic gradients; the trainers run on these, and
  // they are public so the backpropagation can be validated against finite
  // differences.  Output arguments may be null when not needed.
  // Generative: mean-squared error between the residual and (target - x).
  double sample_loss(const ImageGrid& x, const ImageGrid& target,
                     std::vector<ConvLayer>* param_grads, ImageGrid* input_grad = nullptr) const;
  // Discriminative: logistic loss of the pooled score against the 0/1 label.
  double sample_loss(const ImageGrid& x, int label, std::vector<ConvLayer>* param_grads,
                     ImageGrid* input_grad = nullptr) const;

  // Rescales every layer so its circular-convolution operator norm becomes
  // target^(1/K); applied unconditionally (layers already below target are
  // scaled up).  Returns the per-layer norms measured before rescaling.
  std::vector<double> spectral_normalize(double target, int probe_h = 32, int probe_w = 32);

  // Operator norm of one layer's linearity (bias and activation excluded) on
  // a probe_h x probe_w grid.  The circular convolution block-diagonalizes
  // over frequencies, so this is computed exactly as the maximum over the
  // frequency grid of the largest singular value of the per-frequency
  // out_ch x in_ch transfer matrix.
  double layer_operator_norm(int layer, int probe_h = 32, int probe_w = 32) const;

  // Empirical Lipschitz ratios of the perturbation map over random pairs.
  LipschitzReport estimate_lipschitz(int n_pairs, uint64_t seed, double alpha_d = 0.1,
                                     int probe_h = 32, int probe_w = 32, int bins = 20) const;

  void save(const std::string& path) const;
  static ConvNetModule load(const std::string& path);

private:
  ModuleRole role_ = ModuleRole::generative;
  std::vector<ConvLayer> layers_;

  struct Workspace;
  void forward_cached(const ImageGrid& u, Workspace& ws) const;
  void backward(Workspace& ws, const ImageGrid& dout, std::vector<ConvLayer>* grads,
                ImageGrid* dinput) const;
  void sgd_step(const std::vector<ConvLayer>& grads, double step);
  void check_input(const ImageGrid& u) const;
};

// Power-iteration estimate of the largest singular value of an explicit
// rows x cols matrix (row-major): iterate z <- A A^T z and report
// ||A A^T z|| / ||A^T z||.
double matrix_operator_norm(const std::vector<double>& a, int rows, int cols,
                            int max_iter = 100000, double tol = 1e-12);

}  // namespace gdc
