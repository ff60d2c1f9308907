#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gdc/fidelity.hpp"
#include "gdc/neural.hpp"
#include "gdc/prox.hpp"

namespace gdc {

// Geometric penalty growth gamma_t = gamma0 * eta^t; eta must exceed 1 so the
// penalty tightens over iterations.
struct GammaSchedule {
  double gamma0 = 1.0;
  double eta = 1.5;

  double at(int t) const;
  void validate() const;
};

// Composite objective bookkeeping.  FDM couples the data term with an
// explicit prior; PDM has no explicit prior (the learned modules act as one),
// so the objective reduces to the data term.
struct Objective {
  const Fidelity* fidelity = nullptr;
  const PriorSpec* prior = nullptr;  // null for PDM

  double value(const ImageGrid& u) const;
};

struct StepRecord {
  int t = 0;
  double objective = 0.0;   // composite objective after the step
  double residual = 0.0;    // ||u_{t+1} - u_t||
  bool accepted = false;    // candidate-acceptance branch taken
  double gamma = 0.0;
  double beta = 0.0;        // FDM descent modulus (L + gamma)/2
  double d_t = 0.0;         // FDM: ||u_{t+1} - v_t||^2
  double module_disp = 0.0; // PDM: ||u_d - u_t|| (module cascade displacement)
  double ms = 0.0;          // wall time; 0 unless timing was enabled
};

struct PropagationTrace {
  bool fdm = true;
  double initial_objective = 0.0;
  std::vector<StepRecord> steps;

  std::string to_csv() const;             // pinned header t,objective,residual,branch,gamma,beta,d_t,ms
  static PropagationTrace from_csv(const std::string& text);
};

struct StopRule {
  int max_iters = 30;
  // Stop when ||u_{t+1} - u_t|| <= residual_tol.  0 fires only on an exact
  // stall; +inf after the first step; negative disables the criterion.
  double residual_tol = 0.0;
  // Stop when the data term falls to or below this; negative disables.
  double reconstruction_tol = 0.0;
};

struct PropagateOptions {
  GammaSchedule schedule;
  StopRule stop;
  double alpha_d = 0.1;
  bool timing = false;
  // Module ablation switches; propagation runs fine with either module absent.
  const ConvNetModule* gm = nullptr;
  const ConvNetModule* dm = nullptr;
};

// One full-description-model step (generate, discriminate, correct by a
// prox-gradient step, with objective-guarded candidate acceptance).
ImageGrid step_fdm(const Objective& obj, const ImageGrid& u_t, int t, const PropagateOptions& opt,
                   StepRecord& rec);

// One penalized-description-model step (generate, discriminate, penalized
// solve, with gradient-norm-guarded acceptance).  l_cap defaults to the data
// term's Lipschitz constant; candidates whose data-term gradient exceeds it
// are rejected and the state is kept bit-identical.
ImageGrid step_pdm(const Fidelity& fid, const ImageGrid& u_t, int t, const PropagateOptions& opt,
                   StepRecord& rec, double l_cap = -1.0);

struct RunResult {
  ImageGrid u;
  PropagationTrace trace;
};

// Runs steps until a stop criterion fires (max_iters, residual_tol, or
// reconstruction_tol, whichever first).
RunResult run_fdm(const Objective& obj, const ImageGrid& u0, const PropagateOptions& opt);
RunResult run_pdm(const Fidelity& fid, const ImageGrid& u0, const PropagateOptions& opt,
                  double l_cap = -1.0);

}  // namespace gdc
