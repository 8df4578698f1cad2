#pragma once

#include <vector>

#include "qpdiag/lattice.hpp"

namespace qpdiag::detail {

// F_k = sum_j f_j e^{-2 pi i j k / N}
std::vector<cplx> dft_forward(const std::vector<cplx>& f);

// Fourier coefficients c_k, |k| <= K, of a 1-periodic function sampled at
// x_j = x0 + j/N (requires N > 2K)
std::vector<cplx> periodic_coefficients(const std::vector<cplx>& samples, double x0, int K);

}  // namespace qpdiag::detail
