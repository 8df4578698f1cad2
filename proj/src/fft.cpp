#include "fft.hpp"

#include <fftw3.h>

#include <cmath>

#include "qpdiag/errors.hpp"

namespace qpdiag::detail {

std::vector<cplx> dft_forward(const std::vector<cplx>& f) {
  const int N = static_cast<int>(f.size());
  std::vector<cplx> in(f), out(f.size());
  fftw_plan plan = fftw_plan_dft_1d(N, reinterpret_cast<fftw_complex*>(in.data()),
                                    reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  return out;
}

std::vector<cplx> periodic_coefficients(const std::vector<cplx>& samples, double x0, int K) {
  const int N = static_cast<int>(samples.size());
  if (N <= 2 * K) throw Error(ErrorKind::grid, "sample count too small for the requested modes");
  std::vector<cplx> F = dft_forward(samples);
  std::vector<cplx> c(2 * K + 1);
  for (int k = -K; k <= K; ++k) {
    cplx shift = std::polar(1.0 / N, -kTwoPi * k * x0);
    c[k + K] = shift * F[((k % N) + N) % N];
  }
  return c;
}

}  // namespace qpdiag::detail
