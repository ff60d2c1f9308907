#pragma once

#include "gdc/image.hpp"

namespace gdc {

enum class PriorFrame { wavelet, identity, gradient };

// Sparsity prior: phi(u) = lambda * sum |B^T u|^p with B the analysis frame.
struct PriorSpec {
  double p = 1.0;       // one of 0, 0.8, 1
  double lambda = 1e-3;
  PriorFrame frame = PriorFrame::wavelet;
  int wavelet_levels = 2;

  void validate() const;  // throws InvalidInput on out-of-range fields
};

// argmin_v lambda*|v|^p + 0.5*(v-x)^2, exact:
//  - p=1: soft threshold.
//  - p=0: hard threshold; the tie x^2 == 2*lambda keeps x.
//  - p=0.8: Newton on the stationarity equation for the nonzero candidate,
//    then comparison against v=0; ties collapse to 0.
double prox_scalar(double x, double lambda, double p);

// prox of phi/gamma for an orthonormal frame: analysis transform, elementwise
// shrinkage at strength lambda/gamma, synthesis transform.  The gradient frame
// is not orthonormal and admits no exact separable prox, so it is rejected.
ImageGrid prox_prior(const ImageGrid& u, const PriorSpec& prior, double gamma);

// phi(u) itself (used by objective bookkeeping).
double prior_value(const ImageGrid& u, const PriorSpec& prior);

}  // namespace gdc
