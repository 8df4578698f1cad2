#include "qpdiag/rotor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "fft.hpp"
#include "qpdiag/errors.hpp"

namespace qpdiag {

namespace {

double wrap(double t) { return t - std::floor(t); }

struct Fit {
  double slope = 0.0;
  int points = 0;
};

Fit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  Fit f;
  f.points = static_cast<int>(x.size());
  if (x.size() < 2) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double n = static_cast<double>(x.size());
  const double den = n * sxx - sx * sx;
  f.slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  return f;
}

void fit_decay(HoppingSequence& h, int lo, int hi) {
  lo = std::max(1, lo);
  hi = std::min(h.N, hi);
  h.fit_range = {lo, hi};
  std::vector<double> x, y;
  for (int n = lo; n <= hi; ++n) {
    const double a = std::abs(h.at(n));
    if (a > 0.0) {
      x.push_back(std::log(static_cast<double>(n)));
      y.push_back(std::log(a));
    }
  }
  h.slope = least_squares(x, y).slope;
  double top = 0.0;
  for (int n = 1; n <= h.N; ++n) top = std::max(top, std::abs(h.at(n)));
  x.clear();
  y.clear();
  // the exponential fit ignores coefficients at the rounding floor
  for (int n = 1; n <= h.N; ++n) {
    const double a = std::abs(h.at(n));
    if (a > 1e-13 * top) {
      x.push_back(n);
      y.push_back(std::log(a));
    }
  }
  h.exp_rate = -least_squares(x, y).slope;
}

}  // namespace

KickPotential KickPotential::singular(double alpha) { return {KickKind::singular, std::pow(2.0, -alpha), alpha}; }

double KickPotential::value(double theta) const {
  const double t = wrap(theta);
  switch (kind) {
    case KickKind::zero: return 0.0;
    case KickKind::cosine: return amplitude * std::cos(kTwoPi * t);
    case KickKind::singular: return amplitude * std::pow(std::abs(2 * t - 1), alpha);
  }
  return 0.0;
}

double KickPotential::derivative(double theta) const {
  const double t = wrap(theta);
  switch (kind) {
    case KickKind::zero: return 0.0;
    case KickKind::cosine: return -kTwoPi * amplitude * std::sin(kTwoPi * t);
    case KickKind::singular: {
      const double u = 2 * t - 1;
      return 2 * amplitude * alpha * (u < 0 ? -1.0 : 1.0) * std::pow(std::abs(u), alpha - 1);
    }
  }
  return 0.0;
}

std::vector<double> KickPotential::crossings() const {
  std::vector<double> out;
  if (kind == KickKind::zero) return out;
  if (kind == KickKind::singular && !(alpha > 0))
    throw Error(ErrorKind::singular_kick, "exponent must be positive, |2θ-1|^α is unbounded otherwise");
  const double a = amplitude;
  const int top = static_cast<int>(std::floor(std::abs(a)));
  for (int m = -top; m <= top; ++m) {
    if (m % 2 == 0) continue;
    const double r = m / a;
    if (kind == KickKind::cosine) {
      if (std::abs(std::abs(r) - 1.0) < 1e-12)
        throw Error(ErrorKind::singular_kick, "kick touches an odd integer tangentially, tan(π φ̌/2) is not integrable");
      const double t = std::acos(r) / kTwoPi;
      out.push_back(wrap(t));
      out.push_back(wrap(-t));
    } else {
      if (r <= 0) continue;
      const double u = std::pow(r, 1.0 / alpha);
      if (std::abs(u - 1.0) < 1e-12)
        throw Error(ErrorKind::singular_kick, "kick reaches an odd integer at its maximum, tan(π φ̌/2) is not integrable");
      out.push_back(0.5 * (1 - u));
      out.push_back(0.5 * (1 + u));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

KickKind parse_kick_kind(const std::string& text) {
  if (text == "zero") return KickKind::zero;
  if (text == "cosine") return KickKind::cosine;
  if (text == "singular") return KickKind::singular;
  throw Error(ErrorKind::config, "unknown kick kind '" + text + "'");
}

const char* to_string(KickKind kind) {
  switch (kind) {
    case KickKind::zero: return "zero";
    case KickKind::cosine: return "cosine";
    case KickKind::singular: return "singular";
  }
  return "?";
}

HoppingSequence hopping_from_kick(const KickPotential& kick, int N, const HoppingOptions& options) {
  if (N < 1) throw Error(ErrorKind::domain, "hopping range must be positive");
  int P = options.quad_points;
  if (P == 0) P = static_cast<int>(std::bit_ceil(static_cast<unsigned>(256 * N)));
  if (P < 16 * N) throw Error(ErrorKind::domain, "quadrature needs at least 16 N points");

  HoppingSequence h;
  h.N = N;
  h.quad_points = P;
  h.phi.assign(2 * N + 1, 0.0);
  h.err.assign(2 * N + 1, 0.0);
  h.power_law = kick.kind == KickKind::singular;

  if (kick.kind != KickKind::zero) {
    // each simple pole θ_j of tan(π φ̌/2) has residue r_j = -2/(π φ̌'(θ_j)); its
    // r_j π cot(π(θ - θ_j)) part is subtracted and added back in closed form
    const std::vector<double> cross = kick.crossings();
    std::vector<double> res;
    for (double t : cross) res.push_back(-2.0 / (kPi * kick.derivative(t)));

    auto node_gap = [&](double f, int Pg) {
      double g = 1.0;
      for (double t : cross) {
        const double u = t * Pg - f;
        g = std::min(g, std::abs(u - std::nearbyint(u)));
      }
      return g;
    };
    // preferred offsets first, then the best of a fine scan
    double frac = -1.0;
    for (double f : {0.5, 0.25, 0.75, 0.125})
      if (std::min(node_gap(f, P), node_gap(f, 2 * P)) >= 0.1) {
        frac = f;
        break;
      }
    if (frac < 0.0) {
      double best = 0.0;
      for (int j = 0; j < 256; ++j) {
        const double f = (j + 0.5) / 256.0;
        const double g = std::min(node_gap(f, P), node_gap(f, 2 * P));
        if (g > best) {
          best = g;
          frac = f;
        }
      }
      if (best < 0.02) throw Error(ErrorKind::grid, "no quadrature offset keeps the nodes away from the kick crossings");
    }

    auto coefficients = [&](int Pg) {
      std::vector<cplx> s(static_cast<std::size_t>(Pg));
      const double x0 = frac / Pg;
      for (int p = 0; p < Pg; ++p) {
        const double t = x0 + static_cast<double>(p) / Pg;
        double v = std::tan(0.5 * kPi * kick.value(t));
        for (std::size_t j = 0; j < cross.size(); ++j) v -= res[j] * kPi / std::tan(kPi * (t - cross[j]));
        s[static_cast<std::size_t>(p)] = v;
      }
      return detail::periodic_coefficients(s, x0, N);
    };
    const std::vector<cplx> c1 = coefficients(P), c2 = coefficients(2 * P);
    // algebraic singularities give an aliasing error of order P^{-(1+α)}
    const double order = kick.kind == KickKind::singular ? 1.0 + kick.alpha : 0.0;
    for (int n = -N; n <= N; ++n) {
      if (n == 0) continue;
      const std::size_t i = static_cast<std::size_t>(n + N);
      cplx c = c2[i];
      double e = std::abs(c2[i] - c1[i]);
      if (order > 0.0) {
        const cplx corr = (c2[i] - c1[i]) / (std::pow(2.0, order) - 1.0);
        c += corr;
        e = std::abs(corr);
      }
      for (std::size_t j = 0; j < cross.size(); ++j)
        c += res[j] * cplx(0.0, -kPi * (n > 0 ? 1.0 : -1.0)) * std::polar(1.0, -kTwoPi * n * cross[j]);
      h.phi[i] = -c;
      h.err[i] = e;
      h.max_err = std::max(h.max_err, e);
    }
    if (h.max_err > options.tolerance)
      h.warnings.push_back("quadrature error estimate " + std::to_string(h.max_err) + " exceeds tolerance");
  }
  fit_decay(h, options.fit_min > 0 ? options.fit_min : N / 8, options.fit_max > 0 ? options.fit_max : N);
  return h;
}

HoppingSequence power_law_hopping(int N, double s) {
  if (N < 1) throw Error(ErrorKind::domain, "hopping range must be positive");
  HoppingSequence h;
  h.N = N;
  h.phi.assign(2 * N + 1, 0.0);
  h.err.assign(2 * N + 1, 0.0);
  h.power_law = true;
  for (int n = -N; n <= N; ++n)
    if (n != 0) h.phi[static_cast<std::size_t>(n + N)] = std::pow(std::abs(n), -s);
  fit_decay(h, std::max(1, N / 8), N);
  return h;
}

HoppingSequence laplacian_hopping() {
  HoppingSequence h;
  h.N = 1;
  h.phi = {1.0, 0.0, 1.0};
  h.err.assign(3, 0.0);
  h.fit_range = {1, 1};
  return h;
}

std::pair<PerturbedPotential, FourierKernel> assemble_model(const HoppingSequence& hop, double eps,
                                                            const LatticeConfig& config, double R, double s) {
  config.validate();
  if (config.d != 1) throw Error(ErrorKind::domain, "hopping sequences are one-dimensional");
  if (hop.power_law && eps != 0.0 && s >= -hop.slope - 1.0)
    throw Error(ErrorKind::regularity, "sum <n>^s |φ(n)| diverges for s = " + std::to_string(s) +
                                           " with fitted decay " + std::to_string(hop.slope));
  PerturbedPotential V(BasePotential::tangent(), FourierSeries(0), R);
  FourierKernel M(config, R, hop.N, 0);
  if (eps != 0.0)
    for (int n = -hop.N; n <= hop.N; ++n)
      if (n != 0) M.set({n}, 0, eps * hop.at(n));
  return {V, M.trimmed()};
}

void write_hopping_csv(std::ostream& out, const HoppingSequence& hop) {
  out << "n,re,im,err\n" << std::setprecision(17);
  for (int n = -hop.N; n <= hop.N; ++n) {
    const cplx v = hop.at(n);
    out << n << ',' << v.real() << ',' << v.imag() << ',' << hop.err[static_cast<std::size_t>(n + hop.N)] << '\n';
  }
}

}  // namespace qpdiag
