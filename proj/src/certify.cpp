#include "gdc/certify.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace gdc {

namespace {
const char* kind_name(CertKind k) {
  switch (k) {
    case CertKind::descent: return "sufficient-descent";
    case CertKind::fixed_point: return "fixed-point-evidence";
    case CertKind::module_bound: return "module-displacement-bound";
    case CertKind::contraction: return "contraction";
  }
  return "?";
}
const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::not_applicable: return "not-applicable";
  }
  return "?";
}
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string Certificate::to_text() const {
  std::ostringstream out;
  out << "kind: " << kind_name(kind) << "\n";
  out << "verdict: " << verdict_name(verdict) << "\n";
  for (const auto& [k, v] : params) out << "param." << k << ": " << fmt(v) << "\n";
  for (size_t i = 0; i < witnesses.size(); ++i)
    out << "witness." << i << ": index=" << witnesses[i].index << " lhs=" << fmt(witnesses[i].lhs)
        << " rhs=" << fmt(witnesses[i].rhs) << "\n";
  if (!note.empty()) out << "note: " << note << "\n";
  return out.str();
}

Certificate certify_descent(const PropagationTrace& trace, double lipschitz) {
  if (trace.steps.empty()) throw InvalidInput("trace has no steps");
  Certificate cert;
  cert.kind = CertKind::descent;
  if (!trace.fdm) {
    cert.verdict = Verdict::not_applicable;
    cert.note = "descent certification applies to FDM traces";
    return cert;
  }
  cert.verdict = Verdict::pass;

  bool have_initial = std::isfinite(trace.initial_objective);
  double psi_prev = have_initial ? trace.initial_objective : trace.steps.front().objective;
  size_t first = have_initial ? 0 : 1;

  double min_margin = std::numeric_limits<double>::infinity();
  double sum_lhs = 0.0, sum_rhs = 0.0, sum_slack = 0.0;
  int transitions = 0;
  for (size_t i = first; i < trace.steps.size(); ++i) {
    const StepRecord& s = trace.steps[i];
    double slack = 1e-8 * (1.0 + std::fabs(psi_prev));
    double lhs = psi_prev - s.objective;       // achieved decrease
    double rhs = s.beta * s.d_t;               // certified decrease
    double margin = lhs - rhs + slack;
    min_margin = std::min(min_margin, margin);
    if (margin < 0.0) {
      cert.verdict = Verdict::fail;
      cert.witnesses.push_back({s.t, lhs, rhs});
    }
    sum_lhs += lhs;
    sum_rhs += rhs;
    sum_slack += slack;
    ++transitions;
    psi_prev = s.objective;
  }
  // Telescoped form: total certified decrease cannot exceed the total
  // achieved decrease.
  if (transitions > 0 && sum_rhs > sum_lhs + sum_slack) {
    cert.verdict = Verdict::fail;
    cert.witnesses.push_back({-1, sum_lhs, sum_rhs});
  }
  cert.params.emplace_back("L", lipschitz);
  cert.params.emplace_back("transitions", transitions);
  cert.params.emplace_back("min_margin", transitions ? min_margin : 0.0);
  if (!have_initial)
    cert.note = "initial objective unavailable; first recorded transition starts the check";
  return cert;
}

Certificate certify_fixed_point(const PropagationTrace& trace, double lipschitz, double c) {
  if (trace.steps.empty()) throw InvalidInput("trace has no steps");
  Certificate cert;
  cert.kind = CertKind::fixed_point;
  if (trace.fdm) {
    cert.verdict = Verdict::not_applicable;
    cert.note = "fixed-point certification applies to PDM traces";
    return cert;
  }
  cert.verdict = Verdict::pass;

  std::string source = "provided";
  if (!(c >= 0.0)) {
    bool any_disp = false;
    for (const auto& s : trace.steps)
      if (s.module_disp > 0.0) any_disp = true;
    c = 0.0;
    if (any_disp) {
      for (const auto& s : trace.steps) c = std::max(c, s.gamma * s.module_disp * s.module_disp);
      source = "fitted from module displacements";
    } else {
      for (const auto& s : trace.steps) {
        double excess = std::max(0.0, s.residual - lipschitz / s.gamma);
        c = std::max(c, s.gamma * excess * excess);
      }
      source = "fitted from trace residuals";
    }
  }

  double bound_sum = 0.0;
  for (const auto& s : trace.steps) {
    double bound = lipschitz / s.gamma + std::sqrt(c / s.gamma);
    bound_sum += bound;
    double slack = 1e-9 * (1.0 + bound);
    if (s.residual > bound + slack) {
      cert.verdict = Verdict::fail;
      cert.witnesses.push_back({s.t, s.residual, bound});
    }
  }

  // Decay evidence: residual mass must shift away from the tail.  A run that
  // reaches its fixed point immediately leaves both sums at roundoff scale,
  // so the comparison carries a slack tied to the envelope's own scale.
  size_t half = trace.steps.size() / 2;
  double head = 0.0, tail = 0.0;
  for (size_t i = 0; i < trace.steps.size(); ++i)
    (i < half ? head : tail) += trace.steps[i].residual;
  if (tail >= head + 1e-9 * (1.0 + bound_sum)) {
    cert.verdict = Verdict::fail;
    cert.witnesses.push_back({-1, tail, head});
  }

  cert.params.emplace_back("L", lipschitz);
  cert.params.emplace_back("c", c);
  cert.params.emplace_back("head_residual_sum", head);
  cert.params.emplace_back("tail_residual_sum", tail);
  cert.note = "c " + source;
  return cert;
}

Certificate certify_module_bound(const ConvNetModule* gm, const ConvNetModule* dm, double alpha_d,
                                 const std::vector<ImageGrid>& probes,
                                 const std::vector<double>& gammas, double budget) {
  if (probes.empty() || gammas.empty()) throw InvalidInput("need probes and a gamma sequence");
  Certificate cert;
  cert.kind = CertKind::module_bound;
  cert.verdict = Verdict::pass;
  double gamma_max = 0.0;
  for (double g : gammas) {
    if (!(g > 0.0)) throw InvalidInput("gamma values must be positive");
    gamma_max = std::max(gamma_max, g);
  }
  double max_left = 0.0, c_fit = 0.0;
  for (size_t i = 0; i < probes.size(); ++i) {
    ImageGrid u = probes[i];
    ImageGrid u_g = gm ? gm->gm_apply(u) : u;
    ImageGrid u_d = dm ? dm->dm_apply(u_g, alpha_d) : u_g;
    double left = norm2(axpby(1.0, u_d, -1.0, u));
    max_left = std::max(max_left, left);
    c_fit = std::max(c_fit, left * left * gamma_max);
    if (budget > 0.0 && left > std::sqrt(budget / gamma_max)) {
      cert.verdict = Verdict::fail;
      cert.witnesses.push_back({static_cast<int>(i), left, std::sqrt(budget / gamma_max)});
    }
  }
  cert.params.emplace_back("c", c_fit);
  cert.params.emplace_back("max_displacement", max_left);
  cert.params.emplace_back("gamma_max", gamma_max);
  cert.params.emplace_back("probes", static_cast<double>(probes.size()));
  if (budget > 0.0) cert.params.emplace_back("budget", budget);
  cert.note = budget > 0.0 ? "checked against the supplied budget"
                           : "fitted smallest admissible c";
  return cert;
}

void contraction_interval(double rho, double lipschitz, double delta_g, double delta_d,
                          double& lo, double& hi) {
  if (!(rho > 0.0) || !(lipschitz >= rho)) throw InvalidInput("need 0 < rho <= L");
  double prod = (1.0 + delta_g) * (1.0 + delta_d);
  lo = 0.5 * (rho + lipschitz);
  double prod2 = prod * prod;
  if (prod2 - 1.0 <= 0.0) {
    hi = std::numeric_limits<double>::infinity();
    return;
  }
  hi = (2.0 * rho * lipschitz / (rho + lipschitz)) * (1.0 + 1.0 / (prod2 - 1.0));
}

double contraction_factor(double rho, double lipschitz, double gamma, double delta_g,
                          double delta_d) {
  double inner = 1.0 - 2.0 * rho * lipschitz / (gamma * (rho + lipschitz));
  return std::sqrt(std::max(0.0, inner)) * (1.0 + delta_g) * (1.0 + delta_d);
}

Certificate certify_contraction(const Fidelity& fid, const ConvNetModule* gm,
                                const ConvNetModule* dm, double alpha_d, double delta_g,
                                double delta_d, const ContractionProbe& probe) {
  Certificate cert;
  cert.kind = CertKind::contraction;
  double rho = fid.rho();
  double L = fid.lipschitz();
  cert.params.emplace_back("rho", rho);
  cert.params.emplace_back("L", L);
  cert.params.emplace_back("delta_g", delta_g);
  cert.params.emplace_back("delta_d", delta_d);
  if (!(rho > 0.0)) {
    cert.verdict = Verdict::not_applicable;
    cert.note = "data term is not strongly convex; no contraction certificate";
    return cert;
  }
  double prod = (1.0 + delta_g) * (1.0 + delta_d);
  double ratio_cap = rho == L ? std::numeric_limits<double>::infinity()
                              : (rho + L) / std::fabs(rho - L);
  cert.params.emplace_back("growth_product", prod);
  cert.params.emplace_back("growth_cap", ratio_cap);
  if (!(prod < ratio_cap)) {
    cert.verdict = Verdict::fail;
    cert.note = "module growth product reaches the admissible cap; gamma interval is empty";
    cert.witnesses.push_back({-1, prod, ratio_cap});
    return cert;
  }
  double lo, hi;
  contraction_interval(rho, L, delta_g, delta_d, lo, hi);
  cert.params.emplace_back("gamma_lo", lo);
  cert.params.emplace_back("gamma_hi", hi);
  double gamma = std::isinf(hi) ? 2.0 * lo : 0.5 * (lo + hi);
  double delta = contraction_factor(rho, L, gamma, delta_g, delta_d);
  cert.params.emplace_back("gamma", gamma);
  cert.params.emplace_back("delta", delta);
  cert.verdict = Verdict::pass;

  if (probe.u0 && probe.steps > 0) {
    // Unguarded cascade at fixed gamma: generate, discriminate, then take the
    // penalty gradient step on the data term.
    ImageGrid x = *probe.u0;
    double prev_disp = -1.0;
    int checked = 0;
    for (int k = 0; k < probe.steps; ++k) {
      ImageGrid xg = gm ? gm->gm_apply(x) : x;
      ImageGrid xd = dm ? dm->dm_apply(xg, alpha_d) : xg;
      ImageGrid g = fid.grad(xd);
      scale_add(xd, -1.0 / gamma, g);
      double disp = norm2(axpby(1.0, xd, -1.0, x));
      if (prev_disp >= 0.0 && prev_disp > 1e-13 * (1.0 + norm2(x))) {
        double r = disp / prev_disp;
        ++checked;
        if (r > delta + 1e-3) {
          cert.verdict = Verdict::fail;
          cert.witnesses.push_back({k, r, delta});
        }
      }
      prev_disp = disp;
      x = std::move(xd);
    }
    cert.params.emplace_back("probe_steps", probe.steps);
    cert.params.emplace_back("probe_ratios_checked", checked);
  }
  return cert;
}

}  // namespace gdc
