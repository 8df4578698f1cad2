#include "qpdiag/smalldiv.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "fft.hpp"
#include "qpdiag/errors.hpp"

namespace qpdiag {

namespace {

std::string site_string(const Site& n) {
  std::string s = "(";
  for (std::size_t i = 0; i < n.size(); ++i) s += (i ? "," : "") + std::to_string(n[i]);
  return s + ")";
}

}  // namespace

DiophantineCert diophantine_check(const std::vector<double>& omega, double tau, int N_check) {
  LatticeConfig cfg{static_cast<int>(omega.size()), omega};
  cfg.validate();
  if (!(tau > cfg.d)) throw Error(ErrorKind::domain, "Diophantine exponent must exceed the dimension");
  if (N_check < 1) throw Error(ErrorKind::domain, "N_check must be positive");

  DiophantineCert cert{omega, tau, std::numeric_limits<double>::infinity(), N_check, {}};
  Site resonant;
  SiteBox box(cfg.d, N_check);
  const std::size_t centre = box.index(Site(cfg.d, 0));
  // only one of each pair ±n: indices above the centre are lexicographically positive
  for (std::size_t i = centre + 1; i < box.size(); ++i) {
    Site n = box.site(i);
    double dot = cfg.dot(n);
    double dist = torus_norm(dot);
    if (dist <= 16.0 * DBL_EPSILON * std::max(1.0, std::abs(dot))) {
      if (resonant.empty() || max_norm(n) < max_norm(resonant)) resonant = n;
      if (cfg.d == 1) break;
      continue;
    }
    double g = std::pow(bracket(n), tau) * dist;
    if (g < cert.gamma_eff) {
      cert.gamma_eff = g;
      cert.argmin = n;
    }
  }
  if (!resonant.empty())
    throw Error(ErrorKind::resonance, "n = " + site_string(resonant) + " satisfies ||n·ω|| = 0");
  return cert;
}

HomologicalResult solve_homological(const FourierKernel& M, const PerturbedPotential& Vbar, double theta,
                                    const DiophantineCert& cert, const HomologicalOptions& options) {
  if (theta > cert.N_check) throw Error(ErrorKind::domain, "smoothing radius exceeds the Diophantine check range");
  if (!(Vbar.mono_lb() > 0.0) || !(Vbar.coef_mono_lb() > 0.0))
    throw Error(ErrorKind::domain, "divisor potential has no positive monotonicity bound");
  if (M.config().omega != cert.omega) throw Error(ErrorKind::config, "certificate frequency differs from the kernel's");
  const double Rw = Vbar.strip();
  if (M.strip() < Rw * (1.0 - 1e-12))
    throw Error(ErrorKind::strip_exceeded, "kernel strip narrower than the divisor potential strip");

  const LatticeConfig& cfg = M.config();
  const int Km = M.support_mode_radius();
  const int K = std::max(options.mode_radius, Km + 1);
  const int Nz = 4 * K;
  const int Nw = std::min(M.support_site_radius(), static_cast<int>(std::floor(theta)));

  HomologicalResult res{FourierKernel(cfg, Rw, std::max(Nw, 0), K), {}};
  res.report.floor_ratio = std::numeric_limits<double>::infinity();
  const double bound_factor = std::pow(bracket(theta), cert.tau) / (cert.gamma_eff * Vbar.coef_mono_lb());

  std::vector<cplx> f(Nz), vz(Nz), vs(Nz), mz(Nz);
  const int KM = M.mode_radius();
  double res_num = 0.0, res_den = 0.0;
  for (std::size_t i = 0; i < M.box().size(); ++i) {
    const int nn = M.site_norms()[i];
    if (nn == 0 || nn > theta) continue;
    const cplx* row = M.row(i);
    if (std::all_of(row, row + M.row_length(), [](cplx c) { return c == 0.0; })) continue;
    const Site n = M.box().site(i);
    const double a = M.phases()[i];

    double x0 = -1.0;
    for (double off : {0.0, 0.5, 0.25, 0.75}) {
      bool ok = true;
      for (int j = 0; j < Nz && ok; ++j) {
        double x = (j + off) / Nz;
        ok = Vbar.pole_distance(x) >= 1e-6 && Vbar.pole_distance(x - a) >= 1e-6;
      }
      if (ok) {
        x0 = off / Nz;
        break;
      }
    }
    if (x0 < 0.0) throw Error(ErrorKind::grid, "no pole-free sampling grid for site " + std::to_string(nn));
    if (x0 != 0.0) ++res.report.offset_sites;

    double fmax = 0.0, mmax = 0.0;
    for (int j = 0; j < Nz; ++j) {
      double x = x0 + double(j) / Nz;
      cplx m = 0.0;
      for (int k = -KM; k <= KM; ++k)
        if (row[k + KM] != 0.0) m += row[k + KM] * std::polar(1.0, kTwoPi * k * x);
      vz[j] = Vbar.eval_raw(x);
      vs[j] = Vbar.eval_raw(x - a);
      mz[j] = m;
      f[j] = m / (vz[j] - vs[j]);
      if (!std::isfinite(std::abs(f[j]))) f[j] = 0.0;
      fmax = std::max(fmax, std::abs(f[j]));
      mmax = std::max(mmax, std::abs(m));
      if (Vbar.mono_lb() > 0.0)
        res.report.floor_ratio =
            std::min(res.report.floor_ratio, std::abs(vz[j] - vs[j]) / (Vbar.mono_lb() * torus_norm(a)));
    }
    std::vector<cplx> c = detail::periodic_coefficients(f, x0, K);
    for (cplx& v : c)
      if (std::abs(v) < options.noise_floor * fmax) v = 0.0;

    cplx* dst = res.W.row(res.W.box().index(n));
    double wnorm = 0.0;
    for (int k = -K; k <= K; ++k) {
      dst[k + K] = c[k + K];
      wnorm += std::abs(c[k + K]) * std::exp(kTwoPi * std::abs(k) * Rw);
    }
    res.report.aliasing = std::max(res.report.aliasing, std::max(std::abs(c.front()), std::abs(c.back())) *
                                                            std::exp(kTwoPi * K * Rw));

    // residual of the commutator identity on the samples; normalized by the largest term over all sites
    double rmax = 0.0, scale = mmax;
    for (int j = 0; j < Nz; ++j) {
      double x = x0 + double(j) / Nz;
      cplx w = 0.0;
      for (int k = -K; k <= K; ++k)
        if (c[k + K] != 0.0) w += c[k + K] * std::polar(1.0, kTwoPi * k * x);
      const cplx div = vs[j] - vz[j];
      if (!std::isfinite(std::abs(div))) continue;
      rmax = std::max(rmax, std::abs(w * div + mz[j]));
      scale = std::max(scale, std::abs(w * div));
    }
    res_num = std::max(res_num, rmax);
    res_den = std::max(res_den, scale);

    double mnorm = 0.0;
    for (int k = -KM; k <= KM; ++k) mnorm += std::abs(row[k + KM]) * std::exp(kTwoPi * std::abs(k) * M.strip());
    res.report.bound_ratio = std::max(res.report.bound_ratio, wnorm / (bound_factor * mnorm));
  }
  if (res.report.floor_ratio == std::numeric_limits<double>::infinity()) res.report.floor_ratio = 0.0;
  res.report.residual = res_den > 0.0 ? res_num / res_den : 0.0;

  if (res.report.residual > options.residual_tol)
    throw Error(ErrorKind::solver_bound, "commutator residual " + std::to_string(res.report.residual) +
                                             " above tolerance");
  if (res.report.bound_ratio > 1.0 + options.bound_tol)
    throw Error(ErrorKind::solver_bound, "divisor bound exceeded by factor " + std::to_string(res.report.bound_ratio));
  res.W.set_error_budget(M.error_budget() * bound_factor);
  res.W = res.W.trimmed();
  return res;
}

}  // namespace qpdiag
