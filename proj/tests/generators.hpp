#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "qpdiag/kernel.hpp"
#include "qpdiag/potential.hpp"

namespace qpdiag::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  double uniform(double a = 0.0, double b = 1.0) { return a + (b - a) * (static_cast<double>(g_() >> 11) * 0x1.0p-53); }
  int integer(int a, int b) { return a + static_cast<int>(g_() % static_cast<std::uint64_t>(b - a + 1)); }
  bool coin(double p = 0.5) { return uniform() < p; }
  cplx complex(double scale = 1.0) { return {uniform(-scale, scale), uniform(-scale, scale)}; }

 private:
  std::mt19937_64 g_;
};

inline LatticeConfig lattice(int d) {
  if (d == 1) return golden_mean_lattice();
  return LatticeConfig{2, {std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0}};
}

// coefficients with |c(n,k)| <= <n>^{-decay} e^{-2π|k|(R + 0.05)} on a random sparse support
inline FourierKernel random_kernel(Rng& rng, const LatticeConfig& cfg, double R, int N, int K, double density = 0.6,
                                   double decay = 2.0, double scale = 1.0) {
  FourierKernel M(cfg, R, N, K);
  for (std::size_t i = 0; i < M.box().size(); ++i) {
    const Site n = M.box().site(i);
    for (int k = -K; k <= K; ++k)
      if (rng.coin(density))
        M.set(n, k, scale * rng.complex() * std::pow(bracket(n), -decay) * std::exp(-kTwoPi * std::abs(k) * (R + 0.05)));
  }
  return M;
}

// (M + M*)/2
inline FourierKernel self_adjoint_part(const FourierKernel& M) { return cplx(0.5) * (M + involution(M)); }

// 1-d power-law hopping kernel ε<n>^{-decay}, 0 < |n| <= N, k = 0
inline FourierKernel power_kernel(const LatticeConfig& cfg, double R, int N, double eps, double decay) {
  FourierKernel M(cfg, R, N, 0);
  for (int n = -N; n <= N; ++n)
    if (n != 0) M.set({n}, 0, eps * std::pow(std::abs(n), -decay));
  return M;
}

}  // namespace qpdiag::testing
