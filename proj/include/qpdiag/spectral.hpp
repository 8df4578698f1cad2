#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "qpdiag/kernel.hpp"
#include "qpdiag/potential.hpp"

namespace qpdiag {

struct LatticeOperator {
  LatticeConfig config;
  int L = 0;
  cplx z = 0.0;
  SiteBox box;
  Eigen::MatrixXcd H;
  bool hermitian = false;  // set when the inputs are self-adjoint and z is real
};

// entry (n, l) = M(z - n·ω, l - n) + V(z - n·ω) δ_{nl} over the box |n| <= L
LatticeOperator represent(const FourierKernel& M, cplx z, int L);
LatticeOperator represent(const FourierKernel& M, const PerturbedPotential& V, cplx z, int L);

struct EigenPairs {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // orthonormal columns
  double max_residual = 0.0; // max_j ||H v_j - λ_j v_j|| / ||H||
};

EigenPairs oracle_eigen(const LatticeOperator& H);

// peak site index (box order) of each eigenvector
std::vector<std::size_t> eigen_peaks(const EigenPairs& eig);

struct EigenMatch {
  int interior = 0;        // matched radius: |n| <= interior
  double max_error = 0.0;  // max |λ_match - V^(x - n·ω)|
  int peak_mismatches = 0; // pairs whose eigenvector peak is not n, plus any count mismatch
  std::vector<double> predicted, matched, errors;
  std::vector<Site> sites;
};

// sorted predictions V^(z - n·ω), |n| <= interior, are paired with the sorted
// eigenvalues whose eigenvector peaks lie in the same half-box
EigenMatch match_eigenvalues(const LatticeOperator& H, const EigenPairs& eig, const PerturbedPotential& V_hat,
                             int interior);

struct EigenfunctionTable {
  SiteBox box;
  Eigen::MatrixXcd phi;    // column j is φ_n for n = box.site(j), restricted to the box
  double residual = 0.0;   // max over interior n of ||(H - V^(z - n·ω)) φ_n|| on the interior
  double decay_ratio = 0.0;  // max |φ_n(i)| / (2 <n - i>^{-exponent})
  double gram_min = 0.0;   // smallest eigenvalue of the Gram matrix
};

// φ_n(i) = U^{-1}(z - i·ω, n - i); exponent is s - τ - 7δ
EigenfunctionTable eigenfunctions(const FourierKernel& U_inv, cplx z, int L, double exponent,
                                  const LatticeOperator* H = nullptr, const PerturbedPotential* V_hat = nullptr);

// X(s,q) = sqrt(K(2q)(Y(s)^2 + Y(s-q)^2)), requires s - q > d/2
double Y_squared(double s, int d);
double X_constant(double s, double q, int d);

// operator norm on the weighted space l^2_q over the box
double weighted_operator_norm(const Eigen::MatrixXcd& T, const SiteBox& box, double q);
double weighted_norm(const Eigen::VectorXcd& psi, const SiteBox& box, double q);

struct EvolveReport {
  std::vector<double> times;
  std::vector<std::vector<double>> ratios;  // per q: ||e^{-itH}ψ||_q / ||ψ||_q
  std::vector<double> qs;
  std::vector<double> sup;                  // per q
  std::vector<double> ceiling;              // per q: X^4 max(Ñ(U), Ñ(U^{-1}))^4
  std::vector<double> slope;                // per q: running max vs log10 t
};

// t grid: 0 followed by log-spaced points on [t_min, t_max]
std::vector<double> log_time_grid(int points, double t_min, double t_max);

EvolveReport evolve(const FourierKernel& U, const FourierKernel& U_inv, const PerturbedPotential& V_hat, double x,
                    const Eigen::VectorXcd& psi, int L, const std::vector<double>& t_grid,
                    const std::vector<double>& qs, double regularity);

// κ(E) = |{θ in one period : V(θ) <= E}|
double ids(const PerturbedPotential& V_hat, double E);
// eigenvalue count of H at or below E, divided by the box size
double ids_finite(const EigenPairs& eig, double E);
double ids_finite(const FourierKernel& M, const PerturbedPotential& V, double x, int L, double E);

// dense binary layout: "QPOPMAT1", int32 d, L, rows, cols, then row-major (re, im) doubles, little-endian
void write_matrix(std::ostream& out, const LatticeOperator& H);
LatticeOperator read_matrix(std::istream& in);

}  // namespace qpdiag
