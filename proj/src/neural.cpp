#include "gdc/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gdc {

namespace {

// Adds the circular 9-tap stencil of one input plane into one output plane.
// Taps are row-major over the 3x3 neighborhood: wp[3a+b] multiplies
// x(i+a-1, j+b-1).
void stencil_add(const double* xp, const double* wp, int H, int W, double* op) {
  for (int i = 0; i < H; ++i) {
    const double* r0 = xp + static_cast<size_t>((i + H - 1) % H) * W;
    const double* r1 = xp + static_cast<size_t>(i) * W;
    const double* r2 = xp + static_cast<size_t>((i + 1) % H) * W;
    double* orow = op + static_cast<size_t>(i) * W;
    {
      int jm = (W - 1) % W, jp = 1 % W;
      orow[0] += wp[0] * r0[jm] + wp[1] * r0[0] + wp[2] * r0[jp] + wp[3] * r1[jm] +
                 wp[4] * r1[0] + wp[5] * r1[jp] + wp[6] * r2[jm] + wp[7] * r2[0] +
                 wp[8] * r2[jp];
    }
    for (int j = 1; j + 1 < W; ++j) {
      orow[j] += wp[0] * r0[j - 1] + wp[1] * r0[j] + wp[2] * r0[j + 1] + wp[3] * r1[j - 1] +
                 wp[4] * r1[j] + wp[5] * r1[j + 1] + wp[6] * r2[j - 1] + wp[7] * r2[j] +
                 wp[8] * r2[j + 1];
    }
    if (W > 1) {
      int j = W - 1, jm = W - 2;
      orow[j] += wp[0] * r0[jm] + wp[1] * r0[j] + wp[2] * r0[0] + wp[3] * r1[jm] +
                 wp[4] * r1[j] + wp[5] * r1[0] + wp[6] * r2[jm] + wp[7] * r2[j] +
                 wp[8] * r2[0];
    }
  }
}

void conv_forward(const ImageGrid& x, const ConvLayer& L, bool add_bias, ImageGrid& out) {
  out = ImageGrid(x.h, x.w, L.out_ch);
  const size_t plane = out.plane();
  for (int o = 0; o < L.out_ch; ++o) {
    double* op = out.data.data() + o * plane;
    if (add_bias) std::fill(op, op + plane, L.b[o]);
    for (int ic = 0; ic < L.in_ch; ++ic) {
      const double* xp = x.data.data() + ic * plane;
      const double* wp = L.w.data() + (static_cast<size_t>(o) * L.in_ch + ic) * 9;
      stencil_add(xp, wp, x.h, x.w, op);
    }
  }
}

// Transpose of the (bias-free) convolution: scatter output-side gradients
// back to the input side.  Equals a convolution with the 180-degree flipped
// taps, accumulated over output channels.
void conv_backward_data(const ImageGrid& dz, const ConvLayer& L, ImageGrid& dx) {
  dx = ImageGrid(dz.h, dz.w, L.in_ch);
  const size_t plane = dx.plane();
  for (int ic = 0; ic < L.in_ch; ++ic) {
    double* dp = dx.data.data() + ic * plane;
    for (int o = 0; o < L.out_ch; ++o) {
      const double* zp = dz.data.data() + o * plane;
      const double* wp = L.w.data() + (static_cast<size_t>(o) * L.in_ch + ic) * 9;
      double wf[9];
      for (int t = 0; t < 9; ++t) wf[t] = wp[8 - t];
      stencil_add(zp, wf, dz.h, dz.w, dp);
    }
  }
}

void conv_backward_params(const ImageGrid& x, const ImageGrid& dz, const ConvLayer& L,
                          ConvLayer& grad) {
  const int H = x.h, W = x.w;
  const size_t plane = x.plane();
  for (int o = 0; o < L.out_ch; ++o) {
    const double* zp = dz.data.data() + o * plane;
    double gb = 0.0;
    for (size_t i = 0; i < plane; ++i) gb += zp[i];
    grad.b[o] += gb;
    for (int ic = 0; ic < L.in_ch; ++ic) {
      const double* xp = x.data.data() + ic * plane;
      double s[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
      for (int i = 0; i < H; ++i) {
        const double* r0 = xp + static_cast<size_t>((i + H - 1) % H) * W;
        const double* r1 = xp + static_cast<size_t>(i) * W;
        const double* r2 = xp + static_cast<size_t>((i + 1) % H) * W;
        const double* zr = zp + static_cast<size_t>(i) * W;
        {
          int jm = (W - 1) % W, jp = 1 % W;
          double z = zr[0];
          s[0] += z * r0[jm]; s[1] += z * r0[0]; s[2] += z * r0[jp];
          s[3] += z * r1[jm]; s[4] += z * r1[0]; s[5] += z * r1[jp];
          s[6] += z * r2[jm]; s[7] += z * r2[0]; s[8] += z * r2[jp];
        }
        for (int j = 1; j + 1 < W; ++j) {
          double z = zr[j];
          s[0] += z * r0[j - 1]; s[1] += z * r0[j]; s[2] += z * r0[j + 1];
          s[3] += z * r1[j - 1]; s[4] += z * r1[j]; s[5] += z * r1[j + 1];
          s[6] += z * r2[j - 1]; s[7] += z * r2[j]; s[8] += z * r2[j + 1];
        }
        if (W > 1) {
          int j = W - 1, jm = W - 2;
          double z = zr[j];
          s[0] += z * r0[jm]; s[1] += z * r0[j]; s[2] += z * r0[0];
          s[3] += z * r1[jm]; s[4] += z * r1[j]; s[5] += z * r1[0];
          s[6] += z * r2[jm]; s[7] += z * r2[j]; s[8] += z * r2[0];
        }
      }
      double* gw = grad.w.data() + (static_cast<size_t>(o) * L.in_ch + ic) * 9;
      for (int t = 0; t < 9; ++t) gw[t] += s[t];
    }
  }
}

ConvLayer zero_like(const ConvLayer& L) {
  ConvLayer g = L;
  std::fill(g.w.begin(), g.w.end(), 0.0);
  std::fill(g.b.begin(), g.b.end(), 0.0);
  return g;
}

double vec_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

struct ConvNetModule::Workspace {
  std::vector<ImageGrid> inputs;  // input to each layer
  std::vector<ImageGrid> pre;     // pre-activation outputs
  ImageGrid out;                  // post-activation output of the last layer
};

void ConvNetModule::check_input(const ImageGrid& u) const {
  if (u.c != in_channels())
    throw DimensionError("module expects " + std::to_string(in_channels()) + " channel(s), got " +
                         std::to_string(u.c));
}

void ConvNetModule::forward_cached(const ImageGrid& u, Workspace& ws) const {
  check_input(u);
  const size_t K = layers_.size();
  ws.inputs.resize(K);
  ws.pre.resize(K);
  ImageGrid cur = u;
  for (size_t l = 0; l < K; ++l) {
    ws.inputs[l] = cur;
    conv_forward(cur, layers_[l], true, ws.pre[l]);
    cur = ws.pre[l];
    if (layers_[l].relu)
      for (double& v : cur.data) v = v > 0.0 ? v : 0.0;
  }
  ws.out = std::move(cur);
}

void ConvNetModule::backward(Workspace& ws, const ImageGrid& dout, std::vector<ConvLayer>* grads,
                             ImageGrid* dinput) const {
  ImageGrid dz = dout;
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    const ConvLayer& L = layers_[l];
    if (L.relu) {
      const ImageGrid& pre = ws.pre[l];
      for (size_t i = 0; i < dz.data.size(); ++i)
        if (pre.data[i] <= 0.0) dz.data[i] = 0.0;
    }
    if (grads) conv_backward_params(ws.inputs[l], dz, L, (*grads)[l]);
    if (l > 0 || dinput) {
      ImageGrid dx;
      conv_backward_data(dz, L, dx);
      dz = std::move(dx);
    }
  }
  if (dinput) *dinput = std::move(dz);
}

ImageGrid ConvNetModule::forward(const ImageGrid& u) const {
  Workspace ws;
  forward_cached(u, ws);
  return ws.out;
}

double ConvNetModule::score(const ImageGrid& u) const {
  if (role_ != ModuleRole::discriminative)
    throw InvalidInput("score is only defined for discriminative modules");
  ImageGrid out = forward(u);
  double s = 0.0;
  for (double v : out.data) s += v;
  return s / static_cast<double>(out.data.size());
}

ImageGrid ConvNetModule::score_input_grad(const ImageGrid& u) const {
  if (role_ != ModuleRole::discriminative)
    throw InvalidInput("score gradient is only defined for discriminative modules");
  Workspace ws;
  forward_cached(u, ws);
  ImageGrid dout(ws.out.h, ws.out.w, ws.out.c, 1.0 / static_cast<double>(ws.out.data.size()));
  ImageGrid dinput;
  backward(ws, dout, nullptr, &dinput);
  return dinput;
}

ImageGrid ConvNetModule::perturbation(const ImageGrid& u, double alpha_d) const {
  if (role_ == ModuleRole::generative) return forward(u);
  ImageGrid g = score_input_grad(u);
  for (double& v : g.data) v *= -alpha_d;
  return g;
}

ImageGrid ConvNetModule::gm_apply(const ImageGrid& u) const {
  if (role_ != ModuleRole::generative)
    throw InvalidInput("gm_apply requires a generative module");
  ImageGrid out = forward(u);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += u.data[i];
  return out;
}

ImageGrid ConvNetModule::dm_apply(const ImageGrid& u, double alpha_d) const {
  ImageGrid g = score_input_grad(u);
  ImageGrid out = u;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= alpha_d * g.data[i];
  return out;
}

ConvNetModule ConvNetModule::make_generative(int channels, int depth, int width, uint64_t seed) {
  if (channels < 1 || depth < 2 || width < 1) throw InvalidInput("bad module architecture");
  ConvNetModule m;
  m.role_ = ModuleRole::generative;
  Rng rng(seed, "init");
  for (int l = 0; l < depth; ++l) {
    ConvLayer L;
    L.in_ch = l == 0 ? channels : width;
    L.out_ch = l == depth - 1 ? channels : width;
    L.relu = l != depth - 1;
    L.w.resize(L.w_count());
    L.b.assign(L.out_ch, 0.0);
    if (l == depth - 1) {
      // Residual head starts at zero: the untrained module is the identity.
      std::fill(L.w.begin(), L.w.end(), 0.0);
    } else {
      double std = std::sqrt(2.0 / (L.in_ch * 9.0));
      for (double& v : L.w) v = rng.normal(0.0, std);
    }
    m.layers_.push_back(std::move(L));
  }
  return m;
}

ConvNetModule ConvNetModule::make_discriminative(int channels, int depth, int width,
                                                 uint64_t seed) {
  if (channels < 1 || depth < 2 || width < 1) throw InvalidInput("bad module architecture");
  ConvNetModule m;
  m.role_ = ModuleRole::discriminative;
  Rng rng(seed, "init");
  for (int l = 0; l < depth; ++l) {
    ConvLayer L;
    L.in_ch = l == 0 ? channels : width;
    L.out_ch = l == depth - 1 ? 1 : width;
    L.relu = l != depth - 1;
    L.w.resize(L.w_count());
    L.b.assign(L.out_ch, 0.0);
    double std = std::sqrt(2.0 / (L.in_ch * 9.0));
    for (double& v : L.w) v = rng.normal(0.0, std);
    m.layers_.push_back(std::move(L));
  }
  return m;
}

void ConvNetModule::sgd_step(const std::vector<ConvLayer>& grads, double step) {
  for (size_t l = 0; l < layers_.size(); ++l) {
    ConvLayer& L = layers_[l];
    for (size_t i = 0; i < L.w.size(); ++i) L.w[i] -= step * grads[l].w[i];
    for (size_t i = 0; i < L.b.size(); ++i) L.b[i] -= step * grads[l].b[i];
  }
}

double ConvNetModule::sample_loss(const ImageGrid& x, const ImageGrid& target,
                                  std::vector<ConvLayer>* param_grads,
                                  ImageGrid* input_grad) const {
  if (role_ != ModuleRole::generative)
    throw InvalidInput("residual loss is only defined for generative modules");
  if (!x.same_shape(target)) throw DimensionError("training pair shape mismatch");
  Workspace ws;
  forward_cached(x, ws);
  // diff = residual(x) - (target - x)
  ImageGrid diff = ws.out;
  const double n = static_cast<double>(diff.data.size());
  double loss = 0.0;
  for (size_t i = 0; i < diff.data.size(); ++i) {
    diff.data[i] -= target.data[i] - x.data[i];
    loss += diff.data[i] * diff.data[i];
  }
  loss /= n;
  if (param_grads || input_grad) {
    if (param_grads) {
      param_grads->clear();
      for (const auto& L : layers_) param_grads->push_back(zero_like(L));
    }
    ImageGrid dout = diff;
    for (double& v : dout.data) v *= 2.0 / n;
    backward(ws, dout, param_grads, input_grad);
    // x also enters the loss directly through the residual target
    if (input_grad)
      for (size_t i = 0; i < input_grad->data.size(); ++i) input_grad->data[i] += dout.data[i];
  }
  return loss;
}

double ConvNetModule::sample_loss(const ImageGrid& x, int label,
                                  std::vector<ConvLayer>* param_grads,
                                  ImageGrid* input_grad) const {
  if (role_ != ModuleRole::discriminative)
    throw InvalidInput("logistic loss is only defined for discriminative modules");
  Workspace ws;
  forward_cached(x, ws);
  const double n = static_cast<double>(ws.out.data.size());
  double sc = 0.0;
  for (double v : ws.out.data) sc += v;
  sc /= n;
  double y = label ? 1.0 : 0.0;
  // softplus(sc) - y*sc, computed stably.
  double loss = (sc > 0 ? sc + std::log1p(std::exp(-sc)) : std::log1p(std::exp(sc))) - y * sc;
  if (param_grads || input_grad) {
    if (param_grads) {
      param_grads->clear();
      for (const auto& L : layers_) param_grads->push_back(zero_like(L));
    }
    double p = 1.0 / (1.0 + std::exp(-sc));
    ImageGrid dout(ws.out.h, ws.out.w, ws.out.c, (p - y) / n);
    backward(ws, dout, param_grads, input_grad);
  }
  return loss;
}

TrainReport ConvNetModule::train_generative(const std::vector<ImageGrid>& noisy,
                                            const std::vector<ImageGrid>& clean,
                                            const TrainOptions& opt) {
  if (role_ != ModuleRole::generative) throw InvalidInput("wrong module role for this trainer");
  if (noisy.empty() || noisy.size() != clean.size())
    throw InvalidInput("training corpus must be nonempty with matching pair counts");
  for (size_t i = 0; i < noisy.size(); ++i)
    if (!noisy[i].same_shape(clean[i])) throw DimensionError("training pair shape mismatch");
  TrainReport report;
  std::vector<ConvLayer> grads;
  for (int e = 0; e < opt.epochs; ++e) {
    double loss_sum = 0.0;
    for (size_t s = 0; s < noisy.size(); ++s) {
      double loss = sample_loss(noisy[s], clean[s], &grads);
      if (!std::isfinite(loss))
        throw TrainingError("training loss became non-finite at epoch " + std::to_string(e) +
                            ", sample " + std::to_string(s));
      loss_sum += loss;
      sgd_step(grads, opt.step_size);
    }
    report.epoch_loss.push_back(loss_sum / static_cast<double>(noisy.size()));
  }
  return report;
}

TrainReport ConvNetModule::train_discriminative(const std::vector<ImageGrid>& samples,
                                                const std::vector<int>& labels,
                                                const TrainOptions& opt) {
  if (role_ != ModuleRole::discriminative) throw InvalidInput("wrong module role for this trainer");
  if (samples.empty() || samples.size() != labels.size())
    throw InvalidInput("training corpus must be nonempty with matching label count");
  TrainReport report;
  std::vector<ConvLayer> grads;
  for (int e = 0; e < opt.epochs; ++e) {
    double loss_sum = 0.0;
    for (size_t s = 0; s < samples.size(); ++s) {
      double loss = sample_loss(samples[s], labels[s], &grads);
      if (!std::isfinite(loss))
        throw TrainingError("training loss became non-finite at epoch " + std::to_string(e) +
                            ", sample " + std::to_string(s));
      loss_sum += loss;
      sgd_step(grads, opt.step_size);
    }
    report.epoch_loss.push_back(loss_sum / static_cast<double>(samples.size()));
  }
  double correct = 0.0;
  for (size_t s = 0; s < samples.size(); ++s) {
    double sc = score(samples[s]);
    if ((sc > 0.0) == (labels[s] != 0)) correct += 1.0;
  }
  report.accuracy = correct / static_cast<double>(samples.size());
  return report;
}

namespace {

// Largest eigenvalue of a small dense real symmetric matrix (row-major n x n)
// by cyclic Jacobi sweeps.  Converges to machine precision, which matters
// because normalization errors compound multiplicatively across layers.
double symmetric_lambda_max(std::vector<double>& a, int n) {
  if (n == 1) return a[0];
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (int p = 0; p < n; ++p) {
      diag += a[p * n + p] * a[p * n + p];
      for (int q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    }
    if (off <= 1e-28 * (diag + 1e-300)) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a[p * n + q];
        if (std::fabs(apq) < 1e-300) continue;
        double theta = 0.5 * (a[q * n + q] - a[p * n + p]) / apq;
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(1.0 + theta * theta));
        double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  double lam = a[0];
  for (int i = 1; i < n; ++i) lam = std::max(lam, a[i * n + i]);
  return lam;
}

}  // namespace

double ConvNetModule::layer_operator_norm(int layer, int probe_h, int probe_w) const {
  if (layer < 0 || layer >= static_cast<int>(layers_.size()))
    throw InvalidInput("layer index out of range");
  if (probe_h < 1 || probe_w < 1) throw InvalidInput("probe shape must be positive");
  const ConvLayer& L = layers_[layer];
  const int ic = L.in_ch, oc = L.out_ch, n2 = 2 * ic;
  std::vector<double> mre(static_cast<size_t>(oc) * ic), mim(mre.size());
  std::vector<double> emb(static_cast<size_t>(n2) * n2);
  double lam_max = 0.0;
  for (int p = 0; p < probe_h; ++p) {
    const double wp = 2.0 * M_PI * p / probe_h;
    const double cp[3] = {std::cos(wp), 1.0, std::cos(wp)};
    const double sp[3] = {-std::sin(wp), 0.0, std::sin(wp)};
    for (int q = 0; q < probe_w; ++q) {
      const double wq = 2.0 * M_PI * q / probe_w;
      const double cq[3] = {std::cos(wq), 1.0, std::cos(wq)};
      const double sq[3] = {-std::sin(wq), 0.0, std::sin(wq)};
      // Transfer matrix at this frequency: M[o][i] = sum over the 3x3 stencil
      // of w * exp(i*(wp*(a-1) + wq*(b-1))).
      for (int o = 0; o < oc; ++o) {
        for (int i = 0; i < ic; ++i) {
          const double* w9 = &L.w[(static_cast<size_t>(o) * ic + i) * 9];
          double re = 0.0, im = 0.0;
          for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
              re += w9[3 * a + b] * (cp[a] * cq[b] - sp[a] * sq[b]);
              im += w9[3 * a + b] * (cp[a] * sq[b] + sp[a] * cq[b]);
            }
          }
          mre[static_cast<size_t>(o) * ic + i] = re;
          mim[static_cast<size_t>(o) * ic + i] = im;
        }
      }
      double lam;
      if (ic == 1 || oc == 1) {
        // Rank-one (or scalar) transfer: sigma_max^2 is the squared entry sum.
        lam = 0.0;
        for (size_t k = 0; k < mre.size(); ++k) lam += mre[k] * mre[k] + mim[k] * mim[k];
      } else {
        // H = M^H M embedded as the real symmetric [[Re H, -Im H], [Im H, Re H]].
        for (int i = 0; i < ic; ++i) {
          for (int j = 0; j < ic; ++j) {
            double hre = 0.0, him = 0.0;
            for (int o = 0; o < oc; ++o) {
              const size_t oi = static_cast<size_t>(o) * ic + i;
              const size_t oj = static_cast<size_t>(o) * ic + j;
              hre += mre[oi] * mre[oj] + mim[oi] * mim[oj];
              him += mre[oi] * mim[oj] - mim[oi] * mre[oj];
            }
            emb[static_cast<size_t>(i) * n2 + j] = hre;
            emb[static_cast<size_t>(ic + i) * n2 + (ic + j)] = hre;
            emb[static_cast<size_t>(i) * n2 + (ic + j)] = -him;
            emb[static_cast<size_t>(ic + i) * n2 + j] = him;
          }
        }
        lam = symmetric_lambda_max(emb, n2);
      }
      lam_max = std::max(lam_max, lam);
    }
  }
  return std::sqrt(std::max(lam_max, 0.0));
}

std::vector<double> ConvNetModule::spectral_normalize(double target, int probe_h, int probe_w) {
  if (!(target > 0.0)) throw InvalidInput("spectral target must be positive");
  const double per_layer = std::pow(target, 1.0 / static_cast<double>(layers_.size()));
  std::vector<double> norms;
  for (size_t l = 0; l < layers_.size(); ++l) {
    double nrm = layer_operator_norm(static_cast<int>(l), probe_h, probe_w);
    norms.push_back(nrm);
    if (nrm <= 1e-300) continue;  // zero layer already satisfies any bound
    double scale = per_layer / nrm;
    for (double& v : layers_[l].w) v *= scale;
  }
  return norms;
}

LipschitzReport ConvNetModule::estimate_lipschitz(int n_pairs, uint64_t seed, double alpha_d,
                                                  int probe_h, int probe_w, int bins) const {
  if (n_pairs < 1 || bins < 1) throw InvalidInput("need at least one pair and one bin");
  Rng rng(seed, "probe");
  std::vector<double> ratios;
  ratios.reserve(n_pairs);
  const int c = in_channels();
  for (int p = 0; p < n_pairs; ++p) {
    ImageGrid u1(probe_h, probe_w, c);
    for (double& v : u1.data) v = rng.uniform();
    ImageGrid u2(probe_h, probe_w, c);
    if (p % 2 == 0) {
      for (double& v : u2.data) v = rng.uniform();
    } else {
      // nearby pair: probes the local (differential) behavior
      u2 = u1;
      for (double& v : u2.data) v += 0.01 * rng.normal();
    }
    ImageGrid d = axpby(1.0, u1, -1.0, u2);
    double dn = norm2(d);
    if (dn < 1e-12) continue;
    ImageGrid n1 = perturbation(u1, alpha_d);
    ImageGrid n2 = perturbation(u2, alpha_d);
    ratios.push_back(norm2(axpby(1.0, n1, -1.0, n2)) / dn);
  }
  LipschitzReport rep;
  for (double r : ratios) rep.max_ratio = std::max(rep.max_ratio, r);
  double top = rep.max_ratio > 0.0 ? rep.max_ratio * (1.0 + 1e-12) : 1.0;
  rep.bin_edges.resize(bins + 1);
  rep.counts.assign(bins, 0);
  for (int i = 0; i <= bins; ++i) rep.bin_edges[i] = top * i / bins;
  for (double r : ratios) {
    int b = std::min(static_cast<int>(r / top * bins), bins - 1);
    rep.counts[b]++;
  }
  return rep;
}

double matrix_operator_norm(const std::vector<double>& a, int rows, int cols, int max_iter,
                            double tol) {
  if (rows < 1 || cols < 1 || a.size() != static_cast<size_t>(rows) * cols)
    throw InvalidInput("bad matrix dimensions");
  Rng rng(0x5eed5eedull, "probe");
  std::vector<double> z(rows), w(cols), s(rows);
  for (double& v : z) v = rng.normal();
  double est = 0.0, prev = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    for (int j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (int i = 0; i < rows; ++i) acc += a[static_cast<size_t>(i) * cols + j] * z[i];
      w[j] = acc;
    }
    double wn = vec_norm(w);
    if (wn == 0.0) return 0.0;
    for (int i = 0; i < rows; ++i) {
      double acc = 0.0;
      const double* row = a.data() + static_cast<size_t>(i) * cols;
      for (int j = 0; j < cols; ++j) acc += row[j] * w[j];
      s[i] = acc;
    }
    double sn = vec_norm(s);
    est = sn / wn;
    if (sn == 0.0) return 0.0;
    for (int i = 0; i < rows; ++i) z[i] = s[i] / sn;
    if (prev >= 0.0 && std::fabs(est - prev) <= tol * est) break;
    prev = est;
  }
  return est;
}

namespace {
template <typename T>
void put_raw(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get_raw(std::istream& in, const char* what) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (in.gcount() != sizeof(T)) throw IoError(std::string("truncated checkpoint: ") + what);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}
}  // namespace

void ConvNetModule::save(const std::string& path) const {
  std::string out;
  out.append("GDCW", 4);
  put_raw<uint32_t>(out, 1u);  // format version
  put_raw<uint32_t>(out, static_cast<uint32_t>(role_));
  put_raw<uint32_t>(out, static_cast<uint32_t>(layers_.size()));
  for (const auto& L : layers_) {
    put_raw<int32_t>(out, L.in_ch);
    put_raw<int32_t>(out, L.out_ch);
    put_raw<int32_t>(out, L.kh);
    put_raw<int32_t>(out, L.kw);
    put_raw<uint8_t>(out, L.relu ? 1 : 0);
    for (double v : L.w) put_raw<double>(out, v);
    for (double v : L.b) put_raw<double>(out, v);
  }
  write_file_atomic(path, out);
}

ConvNetModule ConvNetModule::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "GDCW", 4) != 0)
    throw IoError("not a module checkpoint: " + path);
  uint32_t version = get_raw<uint32_t>(in, "version");
  if (version != 1) throw IoError("unsupported checkpoint version: " + path);
  uint32_t role = get_raw<uint32_t>(in, "role");
  if (role > 1) throw IoError("bad module role in checkpoint: " + path);
  uint32_t n_layers = get_raw<uint32_t>(in, "layer count");
  if (n_layers == 0 || n_layers > 1024) throw IoError("bad layer count in checkpoint: " + path);
  ConvNetModule m;
  m.role_ = static_cast<ModuleRole>(role);
  for (uint32_t l = 0; l < n_layers; ++l) {
    ConvLayer L;
    L.in_ch = get_raw<int32_t>(in, "in_ch");
    L.out_ch = get_raw<int32_t>(in, "out_ch");
    L.kh = get_raw<int32_t>(in, "kh");
    L.kw = get_raw<int32_t>(in, "kw");
    L.relu = get_raw<uint8_t>(in, "relu") != 0;
    if (L.in_ch < 1 || L.out_ch < 1 || L.kh != 3 || L.kw != 3)
      throw IoError("bad layer geometry in checkpoint: " + path);
    L.w.resize(L.w_count());
    for (double& v : L.w) v = get_raw<double>(in, "weights");
    L.b.resize(L.out_ch);
    for (double& v : L.b) v = get_raw<double>(in, "biases");
    m.layers_.push_back(std::move(L));
  }
  for (size_t l = 1; l < m.layers_.size(); ++l)
    if (m.layers_[l].in_ch != m.layers_[l - 1].out_ch)
      throw IoError("inconsistent layer channels in checkpoint: " + path);
  return m;
}

}  // namespace gdc
