#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qpdiag/kernel.hpp"
#include "qpdiag/potential.hpp"

namespace qpdiag {

enum class KickKind { zero, cosine, singular };

// zero: 0; cosine: a cos 2πθ; singular: a |2θ - 1|^α
struct KickPotential {
  KickKind kind = KickKind::zero;
  double amplitude = 0.0;
  double alpha = 1.0;

  static KickPotential zero() { return {}; }
  static KickPotential cosine(double a) { return {KickKind::cosine, a, 1.0}; }
  // amplitude 2^{-α} by default, keeping the kick below 1
  static KickPotential singular(double alpha);
  static KickPotential singular(double alpha, double a) { return {KickKind::singular, a, alpha}; }

  double value(double theta) const;
  double derivative(double theta) const;
  // points of [0,1) where the kick is an odd integer: poles of tan(π φ̌ / 2)
  std::vector<double> crossings() const;
};

KickKind parse_kick_kind(const std::string& text);
const char* to_string(KickKind kind);

struct HoppingSequence {
  int N = 0;
  std::vector<cplx> phi;    // φ(n) for n = -N..N
  std::vector<double> err;  // quadrature error estimate per n
  double max_err = 0.0;
  double slope = 0.0;       // log-log least-squares slope of |φ(n)| over the fit range
  double exp_rate = 0.0;    // c in |φ(n)| ~ C e^{-c n}
  std::pair<int, int> fit_range{0, 0};
  bool power_law = false;   // decay is algebraic (singular kick or explicit power law)
  int quad_points = 0;
  std::vector<std::string> warnings;

  cplx at(int n) const { return (n < -N || n > N) ? cplx{} : phi[static_cast<std::size_t>(n + N)]; }
};

struct HoppingOptions {
  int quad_points = 0;     // 0: 256 N, rounded up to a power of two
  int fit_min = 0;         // 0: N / 8
  int fit_max = 0;         // 0: N
  double tolerance = 1e-10;
};

// φ(n) = -∫ tan(π φ̌(θ)/2) e^{-2πinθ} dθ, φ(0) = 0
HoppingSequence hopping_from_kick(const KickPotential& kick, int N, const HoppingOptions& options = {});

// φ(n) = <n>^{-s} for 0 < |n| <= N
HoppingSequence power_law_hopping(int N, double s);
// nearest-neighbour stencil φ(±1) = 1
HoppingSequence laplacian_hopping();

// V = tangent base, M(z, n) = ε φ(n) in the k = 0 mode; s is the target regularity
std::pair<PerturbedPotential, FourierKernel> assemble_model(const HoppingSequence& hop, double eps,
                                                            const LatticeConfig& config, double R, double s = 0.0);

void write_hopping_csv(std::ostream& out, const HoppingSequence& hop);

}  // namespace qpdiag
