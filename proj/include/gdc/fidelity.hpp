#pragma once

#include <memory>
#include <optional>

#include "gdc/fft.hpp"
#include "gdc/image.hpp"

namespace gdc {

enum class FidelityKind { deconvolution, interpolation, identity, gradient_domain };

// Quadratic data term f(u) = ||A u - y||^2 (no 1/2 factor), with A the
// observation operator: circular blur, pointwise mask, identity, or per
// channel circular blur of a gradient pair.  Provides exact gradients, the
// spectral smoothness/convexity constants of grad f, and the closed-form
// penalized solve argmin_u f(u) + (gamma/2)||u - u_d||^2.
class Fidelity {
public:
  static Fidelity deconvolution(const ImageGrid& y, const BlurKernel& k);
  static Fidelity interpolation(const ImageGrid& y, const ImageGrid& mask);
  static Fidelity identity(const ImageGrid& y);
  // y_pair: 2-channel observed gradient field, blurred by k per channel.
  static Fidelity gradient_domain(const ImageGrid& y_pair, const BlurKernel& k);

  FidelityKind kind() const { return kind_; }
  const ImageGrid& observation() const { return y_; }
  const BlurKernel& kernel() const;

  double eval(const ImageGrid& u) const;
  ImageGrid grad(const ImageGrid& u) const;
  // Smallest L with ||grad f(a) - grad f(b)|| <= L ||a - b||; exact because f
  // is quadratic (largest eigenvalue of the Hessian 2 A^T A).
  double lipschitz() const;
  // Strong-convexity modulus (smallest Hessian eigenvalue); 0 when the
  // operator has a nullspace (e.g. unobserved mask pixels).
  double rho() const;
  ImageGrid penalized_solve(const ImageGrid& u_d, double gamma) const;

private:
  Fidelity() = default;
  void check(const ImageGrid& u) const;

  FidelityKind kind_ = FidelityKind::identity;
  ImageGrid y_;
  std::optional<BlurKernel> k_;
  SpectralImage otf_;      // blur transfer function (deconv/gradient-domain)
  SpectralImage y_hat_;    // cached spectrum of y
  ImageGrid mask_;         // interpolation
};

}  // namespace gdc
