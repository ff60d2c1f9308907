#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gdc/certify.hpp"
#include "gdc/fidelity.hpp"
#include "gdc/image.hpp"
#include "gdc/neural.hpp"
#include "gdc/propagate.hpp"
#include "gdc/prox.hpp"

namespace gdc {

enum class TaskKind { deconvolution, blind_deblur, interpolation, smoothing, rain_pdm };

// Module-stack ablation: which of generate / discriminate / correct run.
// g and gd iterate the bare modules; gc and gdc run the guarded propagation.
enum class Scheme { g, gd, gc, gdc };

TaskKind parse_task(const std::string& name);
Scheme parse_scheme(const std::string& name);

struct TaskSpec {
  TaskKind task = TaskKind::smoothing;
  ImageGrid y;
  std::optional<BlurKernel> kernel;  // required for deconvolution
  std::optional<ImageGrid> mask;     // required for interpolation
  std::optional<ImageGrid> gt;       // enables psnr/ssim reporting

  const ConvNetModule* gm = nullptr;
  const ConvNetModule* dm = nullptr;
  double alpha_d = 0.1;
  Scheme scheme = Scheme::gdc;

  double lambda = -1.0;  // negative -> task default
  GammaSchedule schedule{1.0, 1.5};
  StopRule stop{30, 0.0, 0.0};
  int wavelet_levels = 2;
  bool timing = false;
  double l_cap_scale = 1.0;      // PDM acceptance threshold = scale * L
  bool init_penalized = false;   // warm start from penalized_solve(y)

  // Blind deblurring only.  `lambda` above applies to the final non-blind
  // pass; the inner alternation anneals its own prior weight from
  // blind_lambda0 down to blind_lambda_floor (strong smoothing first to
  // caricature the image, then progressively weaker to let detail back in —
  // the kernel estimate locks in along the way).
  int kernel_size = 7;
  int pyramid_levels = 1;
  double pyramid_scale = 0.75;
  int t_inner = 40;
  int inner_iters = 12;
  double mu = 1e-3;
  double blind_lambda0 = 0.3;
  double blind_lambda_decay = 0.9;
  double blind_lambda_floor = 0.03;
  double blind_warm_gamma = 0.25;  // penalized-solve anchor weight per round
  double blind_prune = 0.05;       // relative kernel pruning threshold
};

struct TaskResult {
  ImageGrid u;
  PropagationTrace trace;  // main propagation (finest/non-blind stage)
  std::vector<Certificate> certificates;
  std::optional<BlurKernel> estimated_kernel;
  std::vector<PropagationTrace> level_traces;  // blind: per level and round
  std::map<std::string, double> metrics;

  std::string metrics_text() const;
};

double default_lambda(TaskKind task);
PriorSpec default_prior(TaskKind task, double lambda, int wavelet_levels);

TaskResult run_task(const TaskSpec& spec);

// Kernel update: ridge-regularized fit of a blur kernel mapping u to y
// (summed over channels), solved per frequency, cropped to the requested odd
// support, then projected onto the simplex.
BlurKernel solve_kernel(const ImageGrid& u, const ImageGrid& y, double mu, int kh, int kw);

// Coarse-to-fine alternation between gradient-domain propagation and kernel
// estimation, finishing with a non-blind deconvolution at full resolution.
TaskResult run_blind_deblur(const TaskSpec& spec);

}  // namespace gdc
