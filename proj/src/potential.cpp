#include "qpdiag/potential.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fft.hpp"
#include "qpdiag/errors.hpp"

namespace qpdiag {

namespace {

cplx horner(const std::vector<cplx>& p, cplx w) {
  cplx acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * w + *it;
  return acc;
}

cplx horner_derivative(const std::vector<cplx>& p, cplx w) {
  cplx acc = 0.0;
  for (std::size_t j = p.size(); j-- > 1;) acc = acc * w + static_cast<double>(j) * p[j];
  return acc;
}

double wrap01(double x) { return x - std::floor(x); }

}  // namespace

BasePotential BasePotential::tangent() {
  BasePotential b;
  b.kind_ = BaseKind::tangent;
  b.num_ = {cplx(0, 1), cplx(0, -1)};  // tan(pi z) = -i (w - 1)/(w + 1)
  b.den_ = {1.0, 1.0};
  b.poles_ = {cplx(0.5, 0.0)};
  return b;
}

BasePotential BasePotential::cexp() {
  BasePotential b;
  b.kind_ = BaseKind::cexp;
  b.num_ = {0.0, 1.0};
  b.den_ = {1.0};
  return b;
}

BasePotential BasePotential::rational(std::vector<cplx> numerator, std::vector<cplx> denominator) {
  while (denominator.size() > 1 && denominator.back() == 0.0) denominator.pop_back();
  if (denominator.empty() || (denominator.size() == 1 && denominator[0] == 0.0))
    throw Error(ErrorKind::config, "rational potential has a zero denominator");
  BasePotential b;
  b.kind_ = BaseKind::rational;
  b.num_ = std::move(numerator);
  b.den_ = std::move(denominator);
  const int deg = static_cast<int>(b.den_.size()) - 1;
  if (deg >= 1) {
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) C(i, deg - 1) = -b.den_[i] / b.den_[deg];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    for (int i = 0; i < deg; ++i) {
      cplx w = es.eigenvalues()[i];
      if (std::abs(w) < 1e-300) continue;
      // w = e^{2 pi i z}
      double re = wrap01(std::arg(w) / kTwoPi);
      double im = -std::log(std::abs(w)) / kTwoPi;
      if (std::abs(im) < 1e-12) im = 0.0;
      b.poles_.emplace_back(re, im);
    }
  }
  return b;
}

cplx BasePotential::eval(cplx z) const {
  switch (kind_) {
    case BaseKind::tangent: return std::tan(kPi * z);
    case BaseKind::cexp: return std::exp(cplx(0.0, kTwoPi) * z);
    case BaseKind::rational: {
      cplx w = std::exp(cplx(0.0, kTwoPi) * z);
      return horner(num_, w) / horner(den_, w);
    }
  }
  return 0.0;
}

cplx BasePotential::derivative(cplx z) const {
  switch (kind_) {
    case BaseKind::tangent: {
      cplx c = std::cos(kPi * z);
      return kPi / (c * c);
    }
    case BaseKind::cexp: return cplx(0.0, kTwoPi) * std::exp(cplx(0.0, kTwoPi) * z);
    case BaseKind::rational: {
      cplx w = std::exp(cplx(0.0, kTwoPi) * z);
      cplx p = horner(num_, w), q = horner(den_, w);
      cplx dp = horner_derivative(num_, w), dq = horner_derivative(den_, w);
      return (dp * q - p * dq) / (q * q) * cplx(0.0, kTwoPi) * w;
    }
  }
  return 0.0;
}

std::vector<double> BasePotential::real_poles() const {
  std::vector<double> out;
  for (cplx p : poles_)
    if (p.imag() == 0.0) out.push_back(p.real());
  std::sort(out.begin(), out.end());
  return out;
}

double BasePotential::pole_distance(cplx z) const {
  double best = std::numeric_limits<double>::infinity();
  for (cplx p : poles_) {
    double dr = torus_norm(z.real() - p.real());
    double di = z.imag() - p.imag();
    best = std::min(best, std::hypot(dr, di));
  }
  return best;
}

PerturbedPotential::PerturbedPotential(BasePotential base, FourierSeries correction, double R, MonoGrid grid)
    : base_(std::move(base)), correction_(std::move(correction)), R_(R) {
  if (!(R > 0.0)) throw Error(ErrorKind::config, "potential strip must be positive");
  mono_lb_ = mono_constant(*this, R, grid);
  coef_mono_lb_ = coef_mono_constant(*this, R, grid);
}

PerturbedPotential::PerturbedPotential(BasePotential base, FourierSeries correction, double R, double mono_lb,
                                       double coef_mono_lb)
    : base_(std::move(base)), correction_(std::move(correction)), R_(R), mono_lb_(mono_lb),
      coef_mono_lb_(coef_mono_lb) {}

cplx PerturbedPotential::eval_raw(cplx z) const { return base_.eval(z) + correction_.eval(z); }

cplx PerturbedPotential::derivative_raw(cplx z) const { return base_.derivative(z) + correction_.derivative(z); }

cplx PerturbedPotential::eval(cplx z) const {
  if (std::abs(z.imag()) > R_ * (1.0 + 1e-12))
    throw Error(ErrorKind::domain, "argument outside the strip |Im z| <= " + std::to_string(R_));
  double dist = base_.pole_distance(z);
  if (dist < pole_epsilon_)
    throw Error(ErrorKind::pole_proximity, "argument within " + std::to_string(dist) + " of a pole");
  return eval_raw(z);
}

bool PerturbedPotential::self_adjoint(double tol) const {
  for (int j = 0; j < 64; ++j) {
    double x = (j + 0.5) / 64.0 + 0.00390625;
    if (base_.pole_distance(x) < 1e-3) continue;
    cplx v = eval_raw(x);
    if (std::abs(v.imag()) > tol * std::max(1.0, std::abs(v))) return false;
  }
  return true;
}

double mono_constant(const PerturbedPotential& V, double R, MonoGrid grid) {
  if (R > V.strip() * (1.0 + 1e-12)) throw Error(ErrorKind::strip_exceeded, "monotonicity strip beyond potential strip");
  const int P = std::max(64, grid.per_unit);
  // horizontal lines: lattice multiples of 1/P inside [-R, R] plus the two boundary lines
  std::vector<double> ys;
  for (int j = -static_cast<int>(std::floor(R * P)); j <= static_cast<int>(std::floor(R * P)); ++j) ys.push_back(double(j) / P);
  ys.push_back(-R);
  ys.push_back(R);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  double best = std::numeric_limits<double>::infinity();
  std::vector<cplx> line(P);
  for (double y : ys) {
    for (int i = 0; i < P; ++i) line[i] = V.eval_raw(cplx((i + 0.5) / P, y));
    for (int i = 0; i < P; ++i) {
      const cplx v0 = line[i];
      if (!std::isfinite(std::abs(v0))) continue;
      // a -> 0 limit
      double dv = std::abs(V.derivative_raw(cplx((i + 0.5) / P, y)));
      if (std::isfinite(dv)) best = std::min(best, dv);
      for (int j = 1; j <= P / 2; ++j) {
        const cplx v1 = line[((i - j) % P + P) % P];
        double r = std::abs(v0 - v1) / (double(j) / P);
        if (std::isfinite(r)) best = std::min(best, r);
      }
    }
  }
  if (!(best > 0.0) || !std::isfinite(best))
    throw Error(ErrorKind::not_monotone, "monotonicity estimate " + std::to_string(best) + " at R = " + std::to_string(R));
  return best;
}

namespace {

// 1 / (||a|| Ñ_R(1/(V - V(. - a)))) from real-axis samples; a = 0 means the derivative limit
double coef_ratio(const PerturbedPotential& V, double R, double a, const std::vector<cplx>& line, int N) {
  std::vector<cplx> f(N);
  for (int j = 0; j < N; ++j) {
    double x = (j + 0.5) / N;
    cplx d = a == 0.0 ? V.derivative_raw(x) : line[j] - V.eval_raw(x - a);
    f[j] = 1.0 / d;
    if (!std::isfinite(std::abs(f[j]))) f[j] = 0.0;
  }
  const int K = N / 2 - 1;
  std::vector<cplx> c = detail::periodic_coefficients(f, 0.5 / N, K);
  double cmax = 0.0;
  for (cplx v : c) cmax = std::max(cmax, std::abs(v));
  double acc = 0.0;
  for (int k = -K; k <= K; ++k) {
    double m = std::abs(c[k + K]);
    if (m > 1e-14 * cmax) acc += m * std::exp(kTwoPi * std::abs(k) * R);
  }
  return 1.0 / ((a == 0.0 ? 1.0 : a) * acc);
}

}  // namespace

double coef_mono_constant(const PerturbedPotential& V, double R, MonoGrid grid) {
  if (R > V.strip() * (1.0 + 1e-12)) throw Error(ErrorKind::strip_exceeded, "monotonicity strip beyond potential strip");
  const int P = std::max(64, grid.per_unit);
  int N = 2 * P;
  while (N < 8 * V.correction().mode_radius() + 8) N *= 2;
  std::vector<cplx> line(N);
  for (int j = 0; j < N; ++j) line[j] = V.eval_raw((j + 0.5) / N);

  double best = coef_ratio(V, R, 0.0, line, N);
  double best_a = 0.0;
  for (int j = 1; j <= P / 2; ++j) {
    double a = double(j) / P;
    double r = coef_ratio(V, R, a, line, N);
    if (r < best) {
      best = r;
      best_a = a;
    }
  }
  // golden-section refinement around the best grid point
  if (best_a > 0.0) {
    double lo = std::max(1e-6, best_a - 1.0 / P), hi = std::min(0.5, best_a + 1.0 / P);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = coef_ratio(V, R, x1, line, N), f2 = coef_ratio(V, R, x2, line, N);
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = coef_ratio(V, R, x1, line, N);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = coef_ratio(V, R, x2, line, N);
      }
    }
    best = std::min({best, f1, f2});
  }
  if (!(best > 0.0) || !std::isfinite(best))
    throw Error(ErrorKind::not_monotone, "coefficient monotonicity estimate " + std::to_string(best));
  return best;
}

PerturbedPotential update_constant(const PerturbedPotential& V, const FourierSeries& m0, double Q) {
  if (!(Q > 0.0) || !(Q < V.strip()))
    throw Error(ErrorKind::monotonicity_budget, "strip shrink Q = " + std::to_string(Q) + " not inside (0, R)");
  const double n0 = m0.norm(V.strip());
  if (!(n0 < Q * V.mono_lb()) || !(n0 < Q * V.coef_mono_lb()))
    throw Error(ErrorKind::monotonicity_budget, "diagonal norm " + std::to_string(n0) + " not below Q*mono_lb = " +
                                                    std::to_string(Q * std::min(V.mono_lb(), V.coef_mono_lb())));
  PerturbedPotential out(V.base(), V.correction() + m0, V.strip() - Q, V.mono_lb() - n0 / Q,
                         V.coef_mono_lb() - n0 / Q);
  out.set_pole_epsilon(V.pole_epsilon());
  return out;
}

Branch real_branch(const PerturbedPotential& V) {
  if (!V.self_adjoint()) throw Error(ErrorKind::domain, "potential is not self-adjoint");
  std::vector<double> rp = V.base().real_poles();
  if (rp.size() != 1) throw Error(ErrorKind::domain, "expected exactly one real pole per period");
  Branch b{rp[0] - 1.0, rp[0], true};
  double w = b.right - b.left;
  b.increasing = V.eval_raw(b.left + 0.75 * w).real() > V.eval_raw(b.left + 0.25 * w).real();
  return b;
}

void check_branch_monotone(const PerturbedPotential& V, int points) {
  Branch b = real_branch(V);
  double prev = 0.0;
  for (int j = 0; j < points; ++j) {
    double x = b.left + (j + 0.5) * (b.right - b.left) / points;
    double v = V.eval_raw(x).real();
    if (j > 0 && ((b.increasing && !(v > prev)) || (!b.increasing && !(v < prev))))
      throw Error(ErrorKind::not_monotone, "potential not monotone near x = " + std::to_string(x));
    prev = v;
  }
}

double invert_on_branch(const PerturbedPotential& V, double E, double tol) {
  Branch b = real_branch(V);
  double lo = b.left, hi = b.right;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    double mid = 0.5 * (lo + hi);
    double v = V.eval_raw(mid).real();
    if ((v < E) == b.increasing)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

PhaseSet::PhaseSet(const PerturbedPotential& V, LatticeConfig config, int box_radius, double R)
    : V_(V), config_(std::move(config)), box_radius_(box_radius), R_(R) {}

double PhaseSet::margin(cplx z) const {
  SiteBox box(config_.d, box_radius_);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < box.size(); ++i) m = std::min(m, V_.pole_distance(z - config_.dot(box.site(i))));
  return m;
}

bool PhaseSet::admissible(cplx z) const {
  return std::abs(z.imag()) <= R_ && margin(z) >= V_.pole_epsilon();
}

}  // namespace qpdiag
