#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "qpdiag/kernel.hpp"
#include "qpdiag/potential.hpp"
#include "qpdiag/schedule.hpp"
#include "qpdiag/smalldiv.hpp"

namespace qpdiag {

struct ConjugateOptions {
  double tol = 1e-17;  // tail bound, relative to Ñ_{R,0}(M~)
  int kmax = 60;
  TruncationPolicy policy{};
};

struct ConjugateResult {
  FourierKernel remainder;
  int terms = 0;
  double tail_bound = 0.0;
};

// remainder of e^{W}(V + M~)e^{-W} = V + R once W solves the homological equation for S_θ M~
ConjugateResult conjugate(const PerturbedPotential& Vbar, const FourierKernel& Mtilde, const FourierKernel& W,
                          double theta, const ConjugateOptions& options = {});

struct IterationState {
  PerturbedPotential V;
  FourierKernel M;
  FourierKernel U;
  FourierKernel U_inv;
};

// norms at s = α0, α, α1
using NormTriple = std::array<double, 3>;

struct TraceRow {
  int l = 0;
  double theta = 0.0, theta_next = 0.0, R = 0.0, Q = 0.0, R_next = 0.0;
  NormTriple M_norm{}, M_target{};
  NormTriple W_norm{}, W_target{};
  NormTriple U_norm{}, U_target{};
  NormTriple rem_norm{}, rem_target{};
  double offdiag = 0.0;       // Ñ_{R_l, α0} of the off-diagonal part of M_l
  double offdiag_next = 0.0;  // same for M_{l+1}
  double ratio = 0.0;
  double mono_lb = 0.0, coef_mono_lb = 0.0;
  double drift = 0.0;         // Ñ_{R_{l+1},0}(U U^{-1} - 1)
  double budget_M = 0.0, budget_U = 0.0, budget_W = 0.0;
  HomologicalReport solver;
  int conj_terms = 0;
  double conj_tail = 0.0;
  int exp_terms = 0;
  bool targets_ok = true;
};

struct IterationTrace {
  std::vector<TraceRow> rows;
};

void write_trace_csv(std::ostream& out, const IterationTrace& trace);

struct DiagonalizeOptions {
  double tol = 1e-12;  // stop: off-diagonal Ñ_{R_l, α0}
  int max_steps = 12;
  int N_check = 1024;  // Diophantine certificate range
  TruncationPolicy policy{128, 32, 1e-16};
  double exp_tol = 1e-18;
  HomologicalOptions homological{};
  ConjugateOptions conj{};
};

struct StepContext {
  const Schedule& schedule;
  const DiophantineCert& cert;
  const DiagonalizeOptions& options;
};

struct StepResult {
  IterationState next;
  FourierKernel W;
  FourierKernel remainder;
  TraceRow row;
};

StepResult step(const IterationState& state, const StepContext& ctx, int l, const FourierKernel& next_section);

struct FinalChecks {
  double M_norm = 0.0;      // Ñ_{R, α+3δ}(M)
  double U_dev = 0.0;       // Ñ_{R/2, α-τ-4δ}(U - 1)
  double U_inv_dev = 0.0;
  double K1 = 0.0, K1_bound = 0.0;
  double V_dev = 0.0;       // Ñ_{R/2,0}(V^ - V)
  double K2 = 0.0, K2_bound = 0.0;
  double mono_hat = 0.0;    // tracked lower bound for V^
  double mono_hat_estimate = 0.0;  // fresh grid estimate at R/2
  double mono_initial = 0.0;
  double drift = 0.0;       // Ñ_{R_L,0}(U U^{-1} - 1)
  double offdiag = 0.0;
  bool K1_ok = false, K2_ok = false, vr2_ok = false, converged = false, targets_ok = true;
  bool ok() const { return K1_ok && K2_ok && vr2_ok && converged && targets_ok; }
};

struct DiagonalizeResult {
  FourierKernel U;
  FourierKernel U_inv;
  PerturbedPotential V_hat;
  IterationTrace trace;
  Schedule schedule;
  FinalChecks checks;
};

DiagonalizeResult diagonalize(const PerturbedPotential& V, const FourierKernel& M, Schedule schedule,
                              const DiagonalizeOptions& options = {});

std::string summary_json(const DiagonalizeResult& result);

}  // namespace qpdiag
