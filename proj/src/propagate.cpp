#include "gdc/propagate.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace gdc {

void GammaSchedule::validate() const {
  if (!(gamma0 > 0.0)) throw InvalidInput("gamma0 must be positive");
  if (!(eta > 1.0)) throw InvalidInput("gamma growth factor eta must be > 1");
}

double GammaSchedule::at(int t) const {
  validate();
  if (t < 0) throw InvalidInput("schedule index must be nonnegative");
  return gamma0 * std::pow(eta, t);
}

double Objective::value(const ImageGrid& u) const {
  if (!fidelity) throw InvalidInput("objective needs a data term");
  double v = fidelity->eval(u);
  if (prior) v += prior_value(u, *prior);
  return v;
}

namespace {

void check_stage(const ImageGrid& u, const char* stage, int t) {
  if (!all_finite(u))
    throw PropagationError(std::string("non-finite state after ") + stage + " at iteration " +
                           std::to_string(t));
}

// Shared generate/discriminate cascade.
ImageGrid module_cascade(const ImageGrid& u_t, int t, const PropagateOptions& opt) {
  ImageGrid u_g = opt.gm ? opt.gm->gm_apply(u_t) : u_t;
  check_stage(u_g, "the generative module", t);
  ImageGrid u_d = opt.dm ? opt.dm->dm_apply(u_g, opt.alpha_d) : u_g;
  check_stage(u_d, "the discriminative module", t);
  return u_d;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ImageGrid step_fdm(const Objective& obj, const ImageGrid& u_t, int t, const PropagateOptions& opt,
                   StepRecord& rec) {
  if (!obj.fidelity || !obj.prior) throw InvalidInput("fdm step needs a data term and a prior");
  auto t0 = std::chrono::steady_clock::now();
  opt.schedule.validate();
  const double gamma = opt.schedule.at(t);
  const Fidelity& fid = *obj.fidelity;

  ImageGrid u_d = module_cascade(u_t, t, opt);

  // Correction candidate: prox-gradient step anchored at the module output.
  ImageGrid g_d = fid.grad(u_d);
  scale_add(u_d, -1.0 / gamma, g_d);
  ImageGrid u_c = prox_prior(u_d, *obj.prior, gamma);
  check_stage(u_c, "the correction step", t);

  double psi_t = obj.value(u_t);
  double psi_c = obj.value(u_c);
  bool accept = psi_c <= psi_t;
  const ImageGrid& v = accept ? u_c : u_t;

  // Anchor step: prox-gradient from the guarded point.
  ImageGrid g_v = fid.grad(v);
  ImageGrid arg = axpby(1.0, v, -1.0 / gamma, g_v);
  ImageGrid u_next = prox_prior(arg, *obj.prior, gamma);
  check_stage(u_next, "the anchor prox-gradient step", t);

  rec = StepRecord{};
  rec.t = t;
  rec.objective = obj.value(u_next);
  rec.residual = norm2(axpby(1.0, u_next, -1.0, u_t));
  rec.accepted = accept;
  rec.gamma = gamma;
  rec.beta = 0.5 * (fid.lipschitz() + gamma);
  rec.d_t = norm2_sq(axpby(1.0, u_next, -1.0, v));
  rec.ms = opt.timing ? elapsed_ms(t0) : 0.0;
  return u_next;
}

ImageGrid step_pdm(const Fidelity& fid, const ImageGrid& u_t, int t, const PropagateOptions& opt,
                   StepRecord& rec, double l_cap) {
  auto t0 = std::chrono::steady_clock::now();
  opt.schedule.validate();
  const double gamma = opt.schedule.at(t);
  const double cap = l_cap > 0.0 ? l_cap : fid.lipschitz();

  ImageGrid u_d = module_cascade(u_t, t, opt);
  ImageGrid u_c = fid.penalized_solve(u_d, gamma);
  check_stage(u_c, "the penalized solve", t);

  // Safeguard: keep the candidate only while the data-term gradient stays
  // within the trusted region; otherwise the state is left untouched.
  double gnorm = norm2(fid.grad(u_c));
  bool accept = gnorm <= cap;

  rec = StepRecord{};
  rec.t = t;
  rec.gamma = gamma;
  rec.accepted = accept;
  rec.module_disp = norm2(axpby(1.0, u_d, -1.0, u_t));
  ImageGrid u_next = accept ? std::move(u_c) : u_t;
  rec.objective = fid.eval(u_next);
  rec.residual = accept ? norm2(axpby(1.0, u_next, -1.0, u_t)) : 0.0;
  rec.ms = opt.timing ? elapsed_ms(t0) : 0.0;
  return u_next;
}

namespace {

RunResult run_loop(const Objective& obj, const ImageGrid& u0, const PropagateOptions& opt,
                   bool fdm, double l_cap) {
  if (opt.stop.max_iters < 1) throw InvalidInput("max_iters must be >= 1");
  if (!all_finite(u0)) throw PropagationError("non-finite initial state");
  RunResult res;
  res.u = u0;
  res.trace.fdm = fdm;
  res.trace.initial_objective = obj.value(u0);
  for (int t = 0; t < opt.stop.max_iters; ++t) {
    StepRecord rec;
    res.u = fdm ? step_fdm(obj, res.u, t, opt, rec)
                : step_pdm(*obj.fidelity, res.u, t, opt, rec, l_cap);
    res.trace.steps.push_back(rec);
    if (rec.residual <= opt.stop.residual_tol) break;
    if (obj.fidelity->eval(res.u) <= opt.stop.reconstruction_tol) break;
  }
  return res;
}

}  // namespace

RunResult run_fdm(const Objective& obj, const ImageGrid& u0, const PropagateOptions& opt) {
  return run_loop(obj, u0, opt, true, -1.0);
}

RunResult run_pdm(const Fidelity& fid, const ImageGrid& u0, const PropagateOptions& opt,
                  double l_cap) {
  Objective obj;
  obj.fidelity = &fid;
  return run_loop(obj, u0, opt, false, l_cap);
}

namespace {
std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string PropagationTrace::to_csv() const {
  std::ostringstream out;
  out << "t,objective,residual,branch,gamma,beta,d_t,ms\n";
  for (const auto& s : steps) {
    out << s.t << ',' << fmt_double(s.objective) << ',' << fmt_double(s.residual) << ','
        << (s.accepted ? "accepted" : "rejected") << ',' << fmt_double(s.gamma) << ',';
    if (fdm) out << fmt_double(s.beta);
    out << ',';
    if (fdm) out << fmt_double(s.d_t);
    out << ',' << fmt_double(s.ms) << '\n';
  }
  return out.str();
}

PropagationTrace PropagationTrace::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("empty trace");
  // Tolerate a trailing carriage return from foreign editors.
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,objective,residual,branch,gamma,beta,d_t,ms")
    throw InvalidInput("bad trace header: " + line);
  PropagationTrace tr;
  tr.initial_objective = std::numeric_limits<double>::quiet_NaN();  // unknown from CSV
  bool any_beta = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() == 7) cells.push_back("");  // trailing empty field
    if (cells.size() != 8) throw InvalidInput("bad trace row: " + line);
    StepRecord s;
    try {
      s.t = std::stoi(cells[0]);
      s.objective = std::stod(cells[1]);
      s.residual = std::stod(cells[2]);
      if (cells[3] == "accepted")
        s.accepted = true;
      else if (cells[3] == "rejected")
        s.accepted = false;
      else
        throw std::invalid_argument(cells[3]);
      s.gamma = std::stod(cells[4]);
      if (!cells[5].empty()) {
        s.beta = std::stod(cells[5]);
        any_beta = true;
      }
      if (!cells[6].empty()) s.d_t = std::stod(cells[6]);
      s.ms = cells[7].empty() ? 0.0 : std::stod(cells[7]);
    } catch (const std::exception&) {
      throw InvalidInput("bad trace row: " + line);
    }
    tr.steps.push_back(s);
  }
  tr.fdm = any_beta;
  if (tr.steps.empty()) throw InvalidInput("trace has no steps");
  return tr;
}

}  // namespace gdc
