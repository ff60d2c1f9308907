#include "gdc/fidelity.hpp"

#include <cmath>

namespace gdc {

Fidelity Fidelity::deconvolution(const ImageGrid& y, const BlurKernel& k) {
  Fidelity f;
  f.kind_ = FidelityKind::deconvolution;
  f.y_ = y;
  f.k_ = k;
  f.otf_ = kernel_otf(k, y.h, y.w);
  f.y_hat_ = fft2(y);
  return f;
}

Fidelity Fidelity::gradient_domain(const ImageGrid& y_pair, const BlurKernel& k) {
  if (y_pair.c != 2) throw DimensionError("gradient-domain observation must have 2 channels");
  Fidelity f;
  f.kind_ = FidelityKind::gradient_domain;
  f.y_ = y_pair;
  f.k_ = k;
  f.otf_ = kernel_otf(k, y_pair.h, y_pair.w);
  f.y_hat_ = fft2(y_pair);
  return f;
}

Fidelity Fidelity::interpolation(const ImageGrid& y, const ImageGrid& mask) {
  if (!y.same_shape(mask)) throw DimensionError("mask must match observation shape");
  Fidelity f;
  f.kind_ = FidelityKind::interpolation;
  f.y_ = y;
  f.mask_ = binarize_mask(mask);
  return f;
}

Fidelity Fidelity::identity(const ImageGrid& y) {
  Fidelity f;
  f.kind_ = FidelityKind::identity;
  f.y_ = y;
  return f;
}

const BlurKernel& Fidelity::kernel() const {
  if (!k_) throw InvalidInput("fidelity has no kernel");
  return *k_;
}

void Fidelity::check(const ImageGrid& u) const {
  if (!u.same_shape(y_)) throw DimensionError("fidelity input shape mismatch");
}

double Fidelity::eval(const ImageGrid& u) const {
  check(u);
  switch (kind_) {
    case FidelityKind::identity: {
      double s = 0.0;
      for (size_t i = 0; i < u.data.size(); ++i) {
        double d = u.data[i] - y_.data[i];
        s += d * d;
      }
      return s;
    }
    case FidelityKind::interpolation: {
      // Unobserved y entries carry no information, so the residual is the
      // masked difference, not mask*u - y.
      double s = 0.0;
      for (size_t i = 0; i < u.data.size(); ++i) {
        double d = mask_.data[i] * (u.data[i] - y_.data[i]);
        s += d * d;
      }
      return s;
    }
    case FidelityKind::deconvolution:
    case FidelityKind::gradient_domain: {
      // Parseval: residual energy measured in the spectral domain.
      SpectralImage su = fft2(u);
      double s = 0.0;
      for (int ch = 0; ch < su.c; ++ch)
        for (size_t i = 0; i < su.plane(); ++i) {
          auto r = otf_.data[i] * su.data[ch * su.plane() + i] - y_hat_.data[ch * su.plane() + i];
          s += std::norm(r);
        }
      return s;
    }
  }
  throw Error(errc::internal, "unreachable fidelity kind");
}

ImageGrid Fidelity::grad(const ImageGrid& u) const {
  check(u);
  switch (kind_) {
    case FidelityKind::identity: {
      ImageGrid g(u.h, u.w, u.c);
      for (size_t i = 0; i < u.data.size(); ++i) g.data[i] = 2.0 * (u.data[i] - y_.data[i]);
      return g;
    }
    case FidelityKind::interpolation: {
      ImageGrid g(u.h, u.w, u.c);
      for (size_t i = 0; i < u.data.size(); ++i)
        g.data[i] = 2.0 * mask_.data[i] * mask_.data[i] * (u.data[i] - y_.data[i]);
      return g;
    }
    case FidelityKind::deconvolution:
    case FidelityKind::gradient_domain: {
      // 2 K^*(K u - y) evaluated spectrally.
      SpectralImage su = fft2(u);
      for (int ch = 0; ch < su.c; ++ch)
        for (size_t i = 0; i < su.plane(); ++i) {
          auto& v = su.data[ch * su.plane() + i];
          v = 2.0 * std::conj(otf_.data[i]) * (otf_.data[i] * v - y_hat_.data[ch * su.plane() + i]);
        }
      return ifft2(su);
    }
  }
  throw Error(errc::internal, "unreachable fidelity kind");
}

double Fidelity::lipschitz() const {
  switch (kind_) {
    case FidelityKind::identity:
    case FidelityKind::interpolation:
      return 2.0;
    case FidelityKind::deconvolution:
    case FidelityKind::gradient_domain:
      return 2.0 * max_abs2(otf_);
  }
  throw Error(errc::internal, "unreachable fidelity kind");
}

double Fidelity::rho() const {
  switch (kind_) {
    case FidelityKind::identity:
      return 2.0;
    case FidelityKind::interpolation: {
      double m = 1.0;
      for (double v : mask_.data) m = std::min(m, v);
      return 2.0 * m * m;
    }
    case FidelityKind::deconvolution:
    case FidelityKind::gradient_domain:
      return 2.0 * min_abs2(otf_);
  }
  throw Error(errc::internal, "unreachable fidelity kind");
}

ImageGrid Fidelity::penalized_solve(const ImageGrid& u_d, double gamma) const {
  check(u_d);
  if (!(gamma > 0.0)) throw InvalidInput("penalty strength gamma must be positive");
  switch (kind_) {
    case FidelityKind::identity: {
      ImageGrid out(u_d.h, u_d.w, u_d.c);
      for (size_t i = 0; i < u_d.data.size(); ++i)
        out.data[i] = (2.0 * y_.data[i] + gamma * u_d.data[i]) / (2.0 + gamma);
      return out;
    }
    case FidelityKind::interpolation: {
      ImageGrid out(u_d.h, u_d.w, u_d.c);
      for (size_t i = 0; i < u_d.data.size(); ++i) {
        double m = mask_.data[i];
        out.data[i] = (2.0 * m * y_.data[i] + gamma * u_d.data[i]) / (2.0 * m * m + gamma);
      }
      return out;
    }
    case FidelityKind::deconvolution:
    case FidelityKind::gradient_domain: {
      // Per-frequency normal equations: (2|K|^2 + gamma) u = 2 K^* y + gamma u_d.
      SpectralImage sd = fft2(u_d);
      for (int ch = 0; ch < sd.c; ++ch)
        for (size_t i = 0; i < sd.plane(); ++i) {
          auto num = 2.0 * std::conj(otf_.data[i]) * y_hat_.data[ch * sd.plane() + i] +
                     gamma * sd.data[ch * sd.plane() + i];
          sd.data[ch * sd.plane() + i] = num / (2.0 * std::norm(otf_.data[i]) + gamma);
        }
      return ifft2(sd);
    }
  }
  throw Error(errc::internal, "unreachable fidelity kind");
}

}  // namespace gdc
