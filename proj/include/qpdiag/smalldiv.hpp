#pragma once

#include <vector>

#include "qpdiag/kernel.hpp"
#include "qpdiag/potential.hpp"

namespace qpdiag {

struct DiophantineCert {
  std::vector<double> omega;
  double tau = 0.0;
  double gamma_eff = 0.0;
  int N_check = 0;
  Site argmin;  // site attaining gamma_eff
};

DiophantineCert diophantine_check(const std::vector<double>& omega, double tau, int N_check);

struct HomologicalOptions {
  int mode_radius = 16;          // kept Fourier modes of W
  double residual_tol = 1e-9;    // relative, on samples
  double bound_tol = 1e-9;       // relative slack on the divisor bound
  double noise_floor = 1e-15;    // coefficients below this fraction of the sample maximum are zeroed
};

struct HomologicalReport {
  double residual = 0.0;          // max residual of W V - V W + S M~ on samples over the largest term
  double aliasing = 0.0;          // last-mode magnitude times strip growth
  double floor_ratio = 0.0;       // min |divisor| / (mono_lb ||n·ω||) on samples
  double bound_ratio = 0.0;       // max sitewise Ñ(W) γ c / (<θ>^τ Ñ(M))
  int offset_sites = 0;           // sites sampled on the half-cell offset grid
};

struct HomologicalResult {
  FourierKernel W;
  HomologicalReport report;
};

HomologicalResult solve_homological(const FourierKernel& M, const PerturbedPotential& Vbar, double theta,
                                    const DiophantineCert& cert, const HomologicalOptions& options = {});

}  // namespace qpdiag
