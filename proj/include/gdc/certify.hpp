#pragma once

#include <string>
#include <vector>

#include "gdc/fidelity.hpp"
#include "gdc/neural.hpp"
#include "gdc/propagate.hpp"

namespace gdc {

enum class CertKind { descent, fixed_point, module_bound, contraction };
enum class Verdict { pass, fail, not_applicable };

struct Witness {
  int index = 0;      // iteration / probe index
  double lhs = 0.0;   // measured quantity
  double rhs = 0.0;   // certified bound it violated
};

// Machine-checkable verdict over a finished run (or an operator probe).
// Pure function of its inputs: re-running yields an identical certificate.
struct Certificate {
  CertKind kind = CertKind::descent;
  Verdict verdict = Verdict::fail;
  std::vector<std::pair<std::string, double>> params;
  std::vector<Witness> witnesses;  // populated on failure
  std::string note;

  bool passed() const { return verdict == Verdict::pass; }
  std::string to_text() const;
};

// Sufficient-descent check for FDM traces: every transition must satisfy
//   psi_t >= psi_{t+1} + beta_t * d_t - slack,   slack = 1e-8 * (1 + |psi_t|),
// plus the telescoped total.  Traces parsed from CSV lack the initial
// objective, so their first transition starts at the first recorded step.
Certificate certify_descent(const PropagationTrace& trace, double lipschitz);

// PDM fixed-point evidence: accepted-step residuals obey
//   residual_t <= L/gamma_t + sqrt(c/gamma_t)
// and the residual sums decay (second half strictly below the first, unless
// the trace never moved).  c may be supplied; otherwise it is fitted from the
// recorded module displacements when present, else from the residuals.
Certificate certify_fixed_point(const PropagationTrace& trace, double lipschitz, double c = -1.0);

// Smallest c such that ||D(G(p)) - p|| <= sqrt(c/gamma) holds for every probe
// and every gamma in the schedule prefix; verdict compares against the given
// budget when one is supplied (budget <= 0 means fit-only, always pass).
Certificate certify_module_bound(const ConvNetModule* gm, const ConvNetModule* dm, double alpha_d,
                                 const std::vector<ImageGrid>& probes,
                                 const std::vector<double>& gammas, double budget = -1.0);

struct ContractionProbe {
  const ImageGrid* u0 = nullptr;  // optional empirical iteration start
  int steps = 0;
};

// Banach-style certificate for the module cascade followed by a penalty-step
// correction on a strongly convex data term.  Computes the admissible gamma
// interval and contraction factor from (rho, L, delta_g, delta_d); fails when
// the growth product makes the interval empty, and is not applicable when the
// data term is not strongly convex.  With a probe, additionally iterates the
// cascade at the selected gamma and checks successive displacement ratios.
Certificate certify_contraction(const Fidelity& fid, const ConvNetModule* gm,
                                const ConvNetModule* dm, double alpha_d, double delta_g,
                                double delta_d, const ContractionProbe& probe = {});

// Admissible interval endpoints alone (exposed for reuse and tests).
void contraction_interval(double rho, double lipschitz, double delta_g, double delta_d,
                          double& lo, double& hi);
double contraction_factor(double rho, double lipschitz, double gamma, double delta_g,
                          double delta_d);

}  // namespace gdc
