#include "qpdiag/iteration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "qpdiag/errors.hpp"

namespace qpdiag {

namespace {

// ad_W(P) = W P - P W
FourierKernel commutator(const FourierKernel& W, const FourierKernel& P, const TruncationPolicy& policy) {
  return product(W, P, policy) - product(P, W, policy);
}

// sum_{j > k} x^j / j!
double exp_tail(double x, int k) {
  if (x == 0.0) return 0.0;
  if (x >= k + 2) return std::numeric_limits<double>::infinity();
  double t = 1.0;
  for (int j = 1; j <= k + 1; ++j) t *= x / j;
  return t / (1.0 - x / (k + 2));
}

NormTriple norms_at(const FourierKernel& M, double R, const Schedule& s) {
  return {norm(M, R, s.alpha0), norm(M, R, s.alpha), norm(M, R, s.alpha1)};
}

FourierKernel minus_identity(FourierKernel U) {
  U.add(Site(U.config().d, 0), 0, -1.0);
  return U;
}

bool within(const NormTriple& v, const NormTriple& t) {
  for (int i = 0; i < 3; ++i)
    if (!(v[i] <= t[i] * (1.0 + 1e-12))) return false;
  return true;
}

}  // namespace

ConjugateResult conjugate(const PerturbedPotential& Vbar, const FourierKernel& Mtilde, const FourierKernel& W,
                          double theta, const ConjugateOptions& options) {
  const double Rs = std::min({W.strip(), Vbar.strip(), Mtilde.strip()});
  const FourierKernel Mt = off_diagonal(Mtilde).with_strip(Rs).trimmed();
  FourierKernel AS = smooth(Mt, theta);
  FourierKernel AC = smooth_complement(Mt, theta).trimmed();
  ConjugateResult res{AC, 0, 0.0};
  if (Mt.is_zero()) return res;

  const FourierKernel Ws = W.with_strip(Rs);
  const double x = 2.0 * norm(Ws, Rs, 0.0);
  const double P0 = norm(AS, Rs, 0.0) + norm(AC, Rs, 0.0);
  double fact = 1.0;  // 1/k!
  int k = 0;
  while (true) {
    double tail = exp_tail(x, k) * P0;
    if (tail <= options.tol * P0 || (AS.is_zero() && AC.is_zero())) {
      res.tail_bound = (AS.is_zero() && AC.is_zero()) ? 0.0 : tail;
      break;
    }
    if (k >= options.kmax)
      throw Error(ErrorKind::series_truncation, "conjugation tail bound " + std::to_string(tail) + " after " +
                                                    std::to_string(k) + " terms");
    ++k;
    fact /= k;
    if (!AS.is_zero()) {
      AS = commutator(Ws, AS, options.policy);
      res.remainder += (fact * k / (k + 1.0)) * AS;  // 1/((k-1)!(k+1))
    }
    if (!AC.is_zero()) {
      AC = commutator(Ws, AC, options.policy);
      res.remainder += fact * AC;
    }
  }
  res.terms = k;
  res.remainder.add_error_budget(res.tail_bound);
  res.remainder = res.remainder.trimmed();
  return res;
}

StepResult step(const IterationState& st, const StepContext& ctx, int l, const FourierKernel& next_section) {
  const Schedule& sc = ctx.schedule;
  const DiagonalizeOptions& opt = ctx.options;
  if (l + 1 >= static_cast<int>(sc.radius.size())) throw Error(ErrorKind::schedule, "schedule arrays too short");
  const double Rl = sc.R_at(l), Rn = sc.R_at(l + 1), Ql = sc.Q(l);
  const double theta_next = std::min(sc.theta(l + 1), static_cast<double>(ctx.cert.N_check));

  TraceRow row;
  row.l = l;
  row.theta = sc.theta(l);
  row.theta_next = sc.theta(l + 1);
  row.R = Rl;
  row.Q = Ql;
  row.R_next = Rn;

  const FourierKernel Mt = off_diagonal(st.M);
  row.M_norm = norms_at(st.M, std::min(Rl, st.M.strip()), sc);
  row.offdiag = norm(Mt, std::min(Rl, Mt.strip()), sc.alpha0);

  StepResult out;
  out.next.V = update_constant(st.V, diagonal_part(st.M), Ql);
  row.mono_lb = out.next.V.mono_lb();
  row.coef_mono_lb = out.next.V.coef_mono_lb();

  HomologicalResult hr = solve_homological(Mt, out.next.V, theta_next, ctx.cert, opt.homological);
  out.W = hr.W;
  row.solver = hr.report;
  row.W_norm = norms_at(out.W, Rn, sc);
  row.budget_W = out.W.error_budget();

  ConjugateOptions co = opt.conj;
  co.policy = opt.policy;
  ConjugateResult cr = conjugate(out.next.V, Mt, out.W, theta_next, co);
  out.remainder = cr.remainder;
  row.conj_terms = cr.terms;
  row.conj_tail = cr.tail_bound;
  row.rem_norm = norms_at(out.remainder, Rn, sc);

  ExpOptions eo;
  eo.policy = opt.policy;
  const FourierKernel Wn = out.W.with_strip(Rn);
  ExpResult ep = exp_kernel(Wn, opt.exp_tol, eo);
  ExpResult em = exp_kernel(-Wn, opt.exp_tol, eo);
  row.exp_terms = std::max(ep.terms, em.terms);
  out.next.U = product(ep.value, st.U.with_strip(Rn), opt.policy);
  out.next.U_inv = product(st.U_inv.with_strip(Rn), em.value, opt.policy);
  row.U_norm = norms_at(minus_identity(out.next.U), Rn, sc);

  out.next.M = out.remainder.with_strip(Rn);
  if (!next_section.is_zero()) {
    FourierKernel conj = product(product(out.next.U, next_section.with_strip(Rn), opt.policy), out.next.U_inv,
                                 opt.policy);
    out.next.M += conj;
  }
  out.next.M = out.next.M.trimmed();
  row.offdiag_next = norm(off_diagonal(out.next.M), Rn, sc.alpha0);
  row.ratio = row.offdiag > 0.0 ? row.offdiag_next / row.offdiag : 0.0;
  row.drift = norm(minus_identity(product(out.next.U, out.next.U_inv, opt.policy)), Rn, 0.0);
  row.budget_M = out.next.M.error_budget();
  row.budget_U = std::max(out.next.U.error_budget(), out.next.U_inv.error_budget());

  const double s3[3] = {sc.alpha0, sc.alpha, sc.alpha1};
  const double lt = sc.log_theta.at(l), ltn = sc.log_theta.at(l + 1);
  for (int i = 0; i < 3; ++i) {
    const double s = s3[i];
    row.M_target[i] = 2.0 * std::exp((s - sc.alpha) * lt);
    row.W_target[i] = std::exp((s - sc.alpha + sc.tau + sc.delta) * lt);
    row.U_target[i] = std::exp((std::max(0.0, s - sc.alpha + sc.tau + sc.delta) + sc.delta) * lt);
    row.rem_target[i] = std::exp((s - sc.alpha) * ltn);
  }
  row.targets_ok = within(row.M_norm, row.M_target) && within(row.W_norm, row.W_target) &&
                   within(row.U_norm, row.U_target) && within(row.rem_norm, row.rem_target);
  out.row = row;
  return out;
}

DiagonalizeResult diagonalize(const PerturbedPotential& V, const FourierKernel& M, Schedule sc,
                              const DiagonalizeOptions& opt) {
  const LatticeConfig& cfg = M.config();
  if (cfg.d != sc.d) throw Error(ErrorKind::config, "schedule dimension differs from the kernel's");
  if (std::abs(V.strip() - sc.R) > 1e-12 * sc.R) throw Error(ErrorKind::config, "potential strip differs from the schedule strip");
  if (M.strip() < sc.R * (1.0 - 1e-12)) throw Error(ErrorKind::strip_exceeded, "kernel strip narrower than the schedule strip");
  const DiophantineCert cert = diophantine_check(cfg.omega, sc.tau, opt.N_check);

  const double Mnorm = norm(M, sc.R, sc.alpha + 3 * sc.delta);
  if (sc.mode == ScheduleMode::certified) {
    if (!(std::log(Mnorm) < sc.log_eps0))
      throw Error(ErrorKind::schedule, "kernel norm " + std::to_string(Mnorm) + " not below eps0 = exp(" +
                                           std::to_string(sc.log_eps0) + ")");
  } else if (!sc.theta0_set) {
    set_theta0(sc, coupled_theta0(Mnorm, sc.alpha, sc.alpha0));
  }
  const int steps = std::min(opt.max_steps, sc.steps() - 1);

  // section radii, clamped beyond the support so the sequence stays strictly increasing
  const int Nsup = M.support_site_radius();
  std::vector<double> thetas;
  for (int l = 0; l <= steps + 1 && l <= sc.steps(); ++l)
    thetas.push_back(std::min(sc.theta(l), static_cast<double>(Nsup + 1 + l)));
  std::vector<FourierKernel> secs = sections(M, thetas);

  DiagonalizeResult res;
  IterationState st{V, secs[0], FourierKernel::identity(cfg, sc.R), FourierKernel::identity(cfg, sc.R)};
  const StepContext ctx{sc, cert, opt};
  FinalChecks& fc = res.checks;
  fc.mono_initial = V.mono_lb();

  int l = 0;
  for (;; ++l) {
    const double Rl = sc.R_at(l);
    const double off = norm(off_diagonal(st.M), std::min(Rl, st.M.strip()), sc.alpha0);
    const bool injected = thetas[std::min<std::size_t>(l, thetas.size() - 1)] >= Nsup;
    if (off < opt.tol && injected) {
      fc.converged = true;
      break;
    }
    if (l >= steps) break;
    StepResult r = step(st, ctx, l, secs.at(l + 1));
    res.trace.rows.push_back(r.row);
    fc.targets_ok = fc.targets_ok && r.row.targets_ok;
    if (sc.mode == ScheduleMode::adaptive && r.row.ratio > sc.contraction && r.row.offdiag_next >= opt.tol)
      throw Error(ErrorKind::non_contraction, "step " + std::to_string(l) + " contraction ratio " +
                                                  std::to_string(r.row.ratio) + " above target " +
                                                  std::to_string(sc.contraction));
    st = std::move(r.next);
  }
  if (sc.mode == ScheduleMode::adaptive) fc.targets_ok = true;  // targets are recorded, not enforced

  // absorb the last diagonal; the remaining strip budget R_L - R/2 pays for it
  const double RL = sc.R_at(l);
  FourierSeries mL = diagonal_part(st.M);
  if (RL > 0.5 * sc.R * (1.0 + 1e-12))
    res.V_hat = update_constant(st.V, mL, RL - 0.5 * sc.R);
  else
    res.V_hat = st.V;
  fc.offdiag = norm(off_diagonal(st.M), std::min(RL, st.M.strip()), sc.alpha0);
  res.U = st.U;
  res.U_inv = st.U_inv;

  const double half = 0.5 * sc.R;
  const double sU = std::max(0.0, sc.alpha - sc.tau - 4 * sc.delta);
  fc.M_norm = Mnorm;
  fc.U_dev = norm(minus_identity(res.U), half, sU);
  fc.U_inv_dev = norm(minus_identity(res.U_inv), half, sU);
  const double C = 1.0 / (1.0 - std::exp(-3 * sc.delta * sc.log_Theta));
  fc.K1 = C * std::exp(tame_constant(sc.alpha) * C);
  fc.K1_bound = fc.K1 * std::pow(Mnorm, 3 * sc.delta / (sc.alpha - sc.alpha0));
  fc.K1_ok = fc.U_dev <= fc.K1_bound * (1 + 1e-12) && fc.U_inv_dev <= fc.K1_bound * (1 + 1e-12);
  {
    const FourierSeries& a = res.V_hat.correction();
    const FourierSeries& b = V.correction();
    const int K = std::max(a.mode_radius(), b.mode_radius());
    FourierSeries diff(K);
    for (int k = -K; k <= K; ++k) diff.set(k, a.coeff(k) - b.coeff(k));
    fc.V_dev = diff.norm(half);
  }
  fc.K2 = 2.0 / (1.0 - std::exp((sc.alpha0 - sc.alpha) * sc.log_Theta));
  fc.K2_bound = fc.K2 * Mnorm;
  fc.K2_ok = fc.V_dev <= fc.K2_bound * (1 + 1e-12);
  fc.mono_hat = res.V_hat.mono_lb();
  fc.vr2_ok = fc.mono_hat >= 0.5 * fc.mono_initial;
  try {
    fc.mono_hat_estimate = mono_constant(res.V_hat, half);
  } catch (const Error&) {
    fc.mono_hat_estimate = 0.0;
  }
  fc.drift = norm(minus_identity(product(res.U, res.U_inv, opt.policy)), res.U.strip(), 0.0);
  res.schedule = std::move(sc);
  return res;
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  out << "l,theta,theta_next,R,Q,R_next";
  for (const char* nm : {"M", "M_target", "W", "W_target", "U", "U_target", "rem", "rem_target"})
    for (const char* s : {"a0", "a", "a1"}) out << ',' << nm << '_' << s;
  out << ",offdiag,offdiag_next,ratio,mono_lb,coef_mono_lb,drift,budget_M,budget_U,budget_W,"
         "residual,aliasing,floor_ratio,bound_ratio,offset_sites,conj_terms,conj_tail,exp_terms,targets_ok\n";
  out.precision(17);
  for (const TraceRow& r : trace.rows) {
    out << r.l << ',' << r.theta << ',' << r.theta_next << ',' << r.R << ',' << r.Q << ',' << r.R_next;
    for (const NormTriple* t : {&r.M_norm, &r.M_target, &r.W_norm, &r.W_target, &r.U_norm, &r.U_target,
                                &r.rem_norm, &r.rem_target})
      for (double v : *t) out << ',' << v;
    out << ',' << r.offdiag << ',' << r.offdiag_next << ',' << r.ratio << ',' << r.mono_lb << ',' << r.coef_mono_lb
        << ',' << r.drift << ',' << r.budget_M << ',' << r.budget_U << ',' << r.budget_W << ',' << r.solver.residual
        << ',' << r.solver.aliasing << ',' << r.solver.floor_ratio << ',' << r.solver.bound_ratio << ','
        << r.solver.offset_sites << ',' << r.conj_terms << ',' << r.conj_tail << ',' << r.exp_terms << ','
        << (r.targets_ok ? 1 : 0) << '\n';
  }
}

std::string summary_json(const DiagonalizeResult& res) {
  const Schedule& s = res.schedule;
  const FinalChecks& c = res.checks;
  nlohmann::json j;
  j["mode"] = to_string(s.mode);
  j["schedule"] = {{"alpha0", s.alpha0}, {"alpha", s.alpha},         {"alpha1", s.alpha1},
                   {"delta", s.delta},   {"tau", s.tau},             {"gamma", s.gamma},
                   {"R", s.R},           {"mono_lb", s.mono_lb},     {"Theta", s.Theta()},
                   {"theta0", std::exp(s.log_theta0)}, {"contraction", s.contraction},
                   {"log_Theta_certified", s.log_Theta_cert}, {"log_eta0", s.log_eta0},
                   {"log_eps0", s.log_eps0}};
  j["steps"] = res.trace.rows.size();
  j["final"] = {{"offdiag", c.offdiag},     {"converged", c.converged},   {"M_norm", c.M_norm},
                {"U_dev", c.U_dev},         {"U_inv_dev", c.U_inv_dev},   {"K1", c.K1},
                {"K1_bound", c.K1_bound},   {"K1_ok", c.K1_ok},           {"V_dev", c.V_dev},
                {"K2", c.K2},               {"K2_bound", c.K2_bound},     {"K2_ok", c.K2_ok},
                {"mono_initial", c.mono_initial}, {"mono_hat", c.mono_hat},
                {"mono_hat_estimate", c.mono_hat_estimate}, {"vr2_ok", c.vr2_ok},
                {"drift", c.drift},         {"targets_ok", c.targets_ok}, {"ok", c.ok()}};
  nlohmann::json rows = nlohmann::json::array();
  for (const TraceRow& r : res.trace.rows)
    rows.push_back({{"l", r.l}, {"offdiag", r.offdiag}, {"offdiag_next", r.offdiag_next}, {"ratio", r.ratio},
                    {"mono_lb", r.mono_lb}, {"drift", r.drift}, {"aliasing", r.solver.aliasing}});
  j["trace"] = rows;
  return j.dump(2);
}

}  // namespace qpdiag
