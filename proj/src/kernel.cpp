#include "qpdiag/kernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "qpdiag/errors.hpp"

namespace qpdiag {

namespace {

cplx unit_phase(double x) { return {std::cos(kTwoPi * x), std::sin(kTwoPi * x)}; }

std::vector<double> mode_weights(int K, double R) {
  std::vector<double> w(2 * K + 1);
  for (int k = -K; k <= K; ++k) w[k + K] = std::exp(kTwoPi * std::abs(k) * R);
  return w;
}

void require_same_config(const FourierKernel& a, const FourierKernel& b) {
  if (a.config() != b.config()) throw Error(ErrorKind::config, "kernels live on different lattices");
}

}  // namespace

FourierSeries FourierSeries::constant(cplx value) {
  FourierSeries f(0);
  f.set(0, value);
  return f;
}

void FourierSeries::set(int k, cplx value) {
  if (std::abs(k) > K_) {
    int K = std::abs(k);
    std::vector<cplx> c(2 * K + 1, 0.0);
    for (int j = -K_; j <= K_; ++j) c[j + K] = c_[j + K_];
    c_.swap(c);
    K_ = K;
  }
  c_[k + K_] = value;
}

cplx FourierSeries::eval(cplx z) const {
  cplx acc = 0.0;
  for (int k = -K_; k <= K_; ++k) {
    const cplx& c = c_[k + K_];
    if (c != 0.0) acc += c * std::exp(cplx(0.0, kTwoPi * k) * z);
  }
  return acc;
}

cplx FourierSeries::derivative(cplx z) const {
  cplx acc = 0.0;
  for (int k = -K_; k <= K_; ++k) {
    const cplx& c = c_[k + K_];
    if (c != 0.0) acc += cplx(0.0, kTwoPi * k) * c * std::exp(cplx(0.0, kTwoPi * k) * z);
  }
  return acc;
}

double FourierSeries::norm(double R) const {
  double acc = 0.0;
  for (int k = -K_; k <= K_; ++k) acc += std::abs(c_[k + K_]) * std::exp(kTwoPi * std::abs(k) * R);
  return acc;
}

bool FourierSeries::is_zero() const {
  return std::all_of(c_.begin(), c_.end(), [](cplx c) { return c == 0.0; });
}

FourierSeries& FourierSeries::operator+=(const FourierSeries& other) {
  if (other.K_ > K_) set(other.K_, coeff(other.K_));
  for (int k = -other.K_; k <= other.K_; ++k) c_[k + K_] += other.c_[k + other.K_];
  return *this;
}

FourierKernel::FourierKernel(LatticeConfig config, double R, int site_radius, int mode_radius)
    : config_(std::move(config)), R_(R), box_(config_.d, site_radius), K_(mode_radius) {
  config_.validate();
  if (!(R >= 0.0)) throw Error(ErrorKind::config, "strip half-width must be nonnegative");
  if (mode_radius < 0) throw Error(ErrorKind::config, "negative mode radius");
  coeffs_.assign(box_.size() * row_length(), 0.0);
  rebuild_dots();
}

void FourierKernel::rebuild_dots() {
  site_dot_.resize(box_.size());
  site_norm_.resize(box_.size());
  for (std::size_t i = 0; i < box_.size(); ++i) {
    Site n = box_.site(i);
    site_dot_[i] = config_.dot(n);
    site_norm_[i] = max_norm(n);
  }
}

FourierKernel FourierKernel::identity(const LatticeConfig& config, double R) {
  FourierKernel M(config, R, 0, 0);
  M.coeffs_[0] = 1.0;
  return M;
}

FourierKernel FourierKernel::shift(const LatticeConfig& config, double R, const Site& e) {
  FourierKernel M(config, R, max_norm(e), 0);
  M.set(e, 0, 1.0);
  return M;
}

FourierKernel FourierKernel::diagonal(const LatticeConfig& config, double R, const FourierSeries& f) {
  FourierKernel M(config, R, 0, f.mode_radius());
  for (int k = -f.mode_radius(); k <= f.mode_radius(); ++k) M.coeffs_[k + f.mode_radius()] = f.coeff(k);
  return M;
}

cplx FourierKernel::coeff(const Site& n, int k) const {
  if (std::abs(k) > K_ || !box_.contains(n)) return 0.0;
  return coeffs_[box_.index(n) * row_length() + (k + K_)];
}

void FourierKernel::grow_to(int site_radius, int mode_radius) {
  if (site_radius <= box_.radius() && mode_radius <= K_) return;
  *this = resized(std::max(site_radius, box_.radius()), std::max(mode_radius, K_));
}

void FourierKernel::set(const Site& n, int k, cplx value) {
  if (static_cast<int>(n.size()) != config_.d) throw Error(ErrorKind::config, "site has wrong dimension");
  grow_to(max_norm(n), std::abs(k));
  coeffs_[box_.index(n) * row_length() + (k + K_)] = value;
}

void FourierKernel::add(const Site& n, int k, cplx value) {
  if (static_cast<int>(n.size()) != config_.d) throw Error(ErrorKind::config, "site has wrong dimension");
  grow_to(max_norm(n), std::abs(k));
  coeffs_[box_.index(n) * row_length() + (k + K_)] += value;
}

cplx FourierKernel::eval(cplx z, const Site& n) const {
  if (!box_.contains(n)) return 0.0;
  const cplx* r = row(box_.index(n));
  cplx acc = 0.0;
  for (int k = -K_; k <= K_; ++k)
    if (r[k + K_] != 0.0) acc += r[k + K_] * std::exp(cplx(0.0, kTwoPi * k) * z);
  return acc;
}

FourierSeries FourierKernel::column(const Site& n) const {
  FourierSeries f(K_);
  if (!box_.contains(n)) return f;
  const cplx* r = row(box_.index(n));
  for (int k = -K_; k <= K_; ++k) f.set(k, r[k + K_]);
  return f;
}

bool FourierKernel::is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](cplx c) { return c == 0.0; });
}

std::size_t FourierKernel::nonzeros() const {
  return static_cast<std::size_t>(std::count_if(coeffs_.begin(), coeffs_.end(), [](cplx c) { return c != 0.0; }));
}

int FourierKernel::support_site_radius() const {
  int n = 0;
  for (std::size_t i = 0; i < box_.size(); ++i) {
    const cplx* r = row(i);
    if (std::any_of(r, r + row_length(), [](cplx c) { return c != 0.0; })) n = std::max(n, site_norm_[i]);
  }
  return n;
}

int FourierKernel::support_mode_radius() const {
  int K = 0;
  for (std::size_t i = 0; i < box_.size(); ++i) {
    const cplx* r = row(i);
    for (int k = -K_; k <= K_; ++k)
      if (r[k + K_] != 0.0) K = std::max(K, std::abs(k));
  }
  return K;
}

FourierKernel FourierKernel::with_strip(double R) const {
  FourierKernel M = *this;
  M.R_ = R;
  return M;
}

FourierKernel FourierKernel::resized(int site_radius, int mode_radius) const {
  FourierKernel M(config_, R_, site_radius, mode_radius);
  M.budget_ = budget_;
  double dropped = 0.0;
  for (std::size_t i = 0; i < box_.size(); ++i) {
    const cplx* r = row(i);
    bool inside = site_norm_[i] <= site_radius;
    std::size_t j = inside ? M.box_.index(box_.site(i)) : 0;
    for (int k = -K_; k <= K_; ++k) {
      cplx c = r[k + K_];
      if (c == 0.0) continue;
      if (inside && std::abs(k) <= mode_radius)
        M.coeffs_[j * M.row_length() + (k + mode_radius)] = c;
      else
        dropped += std::abs(c) * std::exp(kTwoPi * std::abs(k) * R_);
    }
  }
  M.budget_ += dropped;
  return M;
}

FourierKernel FourierKernel::trimmed() const {
  int N = support_site_radius(), K = support_mode_radius();
  if (N == box_.radius() && K == K_) return *this;
  return resized(N, K);
}

FourierKernel& FourierKernel::operator+=(const FourierKernel& other) {
  require_same_config(*this, other);
  grow_to(other.box_.radius(), other.K_);
  R_ = std::min(R_, other.R_);
  for (std::size_t i = 0; i < other.box_.size(); ++i) {
    const cplx* src = other.row(i);
    cplx* dst = row(other.box_.radius() == box_.radius() ? i : box_.index(other.box_.site(i)));
    for (int k = -other.K_; k <= other.K_; ++k) dst[k + K_] += src[k + other.K_];
  }
  budget_ += other.budget_;
  return *this;
}

FourierKernel& FourierKernel::operator-=(const FourierKernel& other) { return *this += -other; }

FourierKernel& FourierKernel::operator*=(cplx factor) {
  for (cplx& c : coeffs_) c *= factor;
  budget_ *= std::abs(factor);
  return *this;
}

FourierKernel FourierKernel::operator-() const {
  FourierKernel M = *this;
  for (cplx& c : M.coeffs_) c = -c;
  return M;
}

WeightedNormValue norm(const FourierKernel& M, double R, double s) {
  if (R > M.strip() * (1.0 + 1e-14) + 1e-300)
    throw Error(ErrorKind::strip_exceeded, "norm requested at R = " + std::to_string(R) +
                                               " beyond the stored strip " + std::to_string(M.strip()));
  if (s < 0.0) throw Error(ErrorKind::domain, "weight exponent must be nonnegative");
  const int K = M.mode_radius();
  const std::vector<double> w = mode_weights(K, R);
  const std::vector<int>& sn = M.site_norms();
  double total = 0.0;
  for (std::size_t i = 0; i < M.box().size(); ++i) {
    const cplx* r = M.row(i);
    double acc = 0.0;
    for (int k = 0; k < 2 * K + 1; ++k)
      if (r[k] != 0.0) acc += std::abs(r[k]) * w[k];
    if (acc != 0.0) total += (s == 0.0 ? 1.0 : std::pow(std::max(1, sn[i]), s)) * acc;
  }
  return {total, R, s};
}

FourierKernel product(const FourierKernel& a, const FourierKernel& b, const TruncationPolicy& policy) {
  require_same_config(a, b);
  const LatticeConfig& cfg = a.config();
  const int d = cfg.d;
  const double R = std::min(a.strip(), b.strip());
  const int Na = a.support_site_radius(), Nb = b.support_site_radius();
  const int Ka = a.support_mode_radius(), Kb = b.support_mode_radius();
  int Nr = Na + Nb, Kr = Ka + Kb;
  if (policy.max_site_radius >= 0) Nr = std::min(Nr, policy.max_site_radius);
  if (policy.max_mode_radius >= 0) Kr = std::min(Kr, policy.max_mode_radius);
  const bool cap_sites = Nr < Na + Nb;

  FourierKernel out(cfg, R, Nr, Kr);
  const SiteBox& rbox = out.box();
  const std::size_t rlen = out.row_length();
  const std::vector<double> wr = mode_weights(std::max(Ka + Kb, Kr), R);
  const int wK = std::max(Ka + Kb, Kr);

  struct RowB {
    Site coords;
    std::ptrdiff_t offset;
    int kmin, kmax;
    const cplx* data;  // indexed by k + b.mode_radius()
  };
  std::vector<RowB> rows_b;
  {
    const int KB = b.mode_radius();
    for (std::size_t j = 0; j < b.box().size(); ++j) {
      const cplx* r = b.row(j);
      int kmin = KB + 1, kmax = -KB - 1;
      for (int k = -KB; k <= KB; ++k)
        if (r[k + KB] != 0.0) {
          kmin = std::min(kmin, k);
          kmax = std::max(kmax, k);
        }
      if (kmin > kmax) continue;
      Site m = b.box().site(j);
      std::ptrdiff_t off = 0;
      for (int i = 0; i < d; ++i) off += static_cast<std::ptrdiff_t>(m[i]) * static_cast<std::ptrdiff_t>(rbox.stride(i));
      rows_b.push_back({std::move(m), off, kmin, kmax, r + KB});
    }
  }

  const int KA = a.mode_radius();
  std::vector<cplx> ph(2 * Kb + 1), bph(2 * Kb + 1);
  double dropped = 0.0;
  for (std::size_t i = 0; i < a.box().size(); ++i) {
    const cplx* ra = a.row(i) + KA;
    int kmin = KA + 1, kmax = -KA - 1;
    for (int k = -KA; k <= KA; ++k)
      if (ra[k] != 0.0) {
        kmin = std::min(kmin, k);
        kmax = std::max(kmax, k);
      }
    if (kmin > kmax) continue;
    const Site l = a.box().site(i);
    // e^{-2 pi i k2 (l·ω)} for k2 in [-Kb, Kb]
    ph[Kb] = 1.0;
    for (int k2 = 1; k2 <= Kb; ++k2) {
      ph[Kb + k2] = unit_phase(-k2 * a.phases()[i]);
      ph[Kb - k2] = std::conj(ph[Kb + k2]);
    }
    std::ptrdiff_t base = 0;
    for (int c = 0; c < d; ++c) base += static_cast<std::ptrdiff_t>(l[c] + Nr) * static_cast<std::ptrdiff_t>(rbox.stride(c));

    for (const RowB& rb : rows_b) {
      bool inside = true;
      if (cap_sites)
        for (int c = 0; c < d; ++c)
          if (std::abs(l[c] + rb.coords[c]) > Nr) {
            inside = false;
            break;
          }
      if (!inside) {
        double sa = 0.0, sb = 0.0;
        for (int k1 = kmin; k1 <= kmax; ++k1) sa += std::abs(ra[k1]) * std::exp(kTwoPi * std::abs(k1) * R);
        for (int k2 = rb.kmin; k2 <= rb.kmax; ++k2) sb += std::abs(rb.data[k2]) * std::exp(kTwoPi * std::abs(k2) * R);
        dropped += sa * sb;
        continue;
      }
      for (int k2 = rb.kmin; k2 <= rb.kmax; ++k2) bph[k2 + Kb] = rb.data[k2] * ph[k2 + Kb];
      cplx* dst = out.row(static_cast<std::size_t>(base + rb.offset)) + Kr;
      for (int k1 = kmin; k1 <= kmax; ++k1) {
        const double ar = ra[k1].real(), ai = ra[k1].imag();
        if (ar == 0.0 && ai == 0.0) continue;
        const int lo = std::max(rb.kmin, -Kr - k1), hi = std::min(rb.kmax, Kr - k1);
        for (int k2 = lo; k2 <= hi; ++k2) {
          const double br = bph[k2 + Kb].real(), bi = bph[k2 + Kb].imag();
          double* p = reinterpret_cast<double*>(dst + k1 + k2);
          p[0] += ar * br - ai * bi;
          p[1] += ar * bi + ai * br;
        }
        if (lo > rb.kmin || hi < rb.kmax) {
          const double am = std::abs(ra[k1]);
          for (int k2 = rb.kmin; k2 <= rb.kmax; ++k2)
            if (k2 < lo || k2 > hi) dropped += am * std::abs(rb.data[k2]) * wr[std::min(wK, std::abs(k1 + k2)) + wK];
        }
      }
    }
  }

  // drop negligible coefficients relative to the result's Ñ_{R,0}
  if (policy.drop_relative > 0.0) {
    const std::vector<double> w = mode_weights(Kr, R);
    double total = 0.0;
    for (std::size_t i = 0; i < rbox.size(); ++i) {
      const cplx* r = out.row(i);
      for (std::size_t k = 0; k < rlen; ++k) total += std::abs(r[k]) * w[k];
    }
    const double thr = policy.drop_relative * total;
    for (std::size_t i = 0; i < rbox.size(); ++i) {
      cplx* r = out.row(i);
      for (std::size_t k = 0; k < rlen; ++k) {
        double m = std::abs(r[k]) * w[k];
        if (m != 0.0 && m < thr) {
          dropped += m;
          r[k] = 0.0;
        }
      }
    }
  }
  const double na = norm(a, R, 0.0), nb = norm(b, R, 0.0);
  out.set_error_budget(a.error_budget() * nb + na * b.error_budget() + a.error_budget() * b.error_budget() +
                       dropped);
  return out.trimmed();
}

FourierKernel product_exact(const FourierKernel& a, const FourierKernel& b) {
  TruncationPolicy p;
  p.drop_relative = 0.0;
  return product(a, b, p);
}

FourierKernel involution(const FourierKernel& M) {
  // M*(z,n) = conj M(conj(z) - n·ω, -n), i.e. c*(n,k) = conj c(-n,-k) e^{-2 pi i k (n·ω)}
  FourierKernel out(M.config(), M.strip(), M.site_radius(), M.mode_radius());
  const std::size_t size = M.box().size();
  const int K = M.mode_radius();
  for (std::size_t i = 0; i < size; ++i) {
    const cplx* src = M.row(size - 1 - i);
    cplx* dst = out.row(i);
    const double nw = M.phases()[i];
    for (int k = -K; k <= K; ++k) {
      cplx c = src[-k + K];
      if (c != 0.0) dst[k + K] = std::conj(c) * unit_phase(-k * nw);
    }
  }
  out.set_error_budget(M.error_budget());
  return out;
}

FourierKernel smooth(const FourierKernel& M, double theta) {
  FourierKernel out = M;
  for (std::size_t i = 0; i < M.box().size(); ++i)
    if (M.site_norms()[i] > theta) std::fill(out.row(i), out.row(i) + out.row_length(), cplx{});
  return out.trimmed();
}

FourierKernel smooth_complement(const FourierKernel& M, double theta) {
  FourierKernel out = M;
  for (std::size_t i = 0; i < M.box().size(); ++i)
    if (M.site_norms()[i] <= theta) std::fill(out.row(i), out.row(i) + out.row_length(), cplx{});
  return out;
}

std::vector<FourierKernel> sections(const FourierKernel& M, const std::vector<double>& thetas) {
  if (thetas.empty() || thetas.front() < 0.0) throw Error(ErrorKind::schedule, "section radii must start at a nonnegative value");
  for (std::size_t l = 1; l < thetas.size(); ++l)
    if (!(thetas[l] > thetas[l - 1])) throw Error(ErrorKind::schedule, "section radii must be strictly increasing");
  std::vector<FourierKernel> out;
  out.reserve(thetas.size());
  for (std::size_t l = 0; l < thetas.size(); ++l) {
    FourierKernel sec = M;
    sec.set_error_budget(0.0);
    for (std::size_t i = 0; i < M.box().size(); ++i) {
      const int n = M.site_norms()[i];
      const bool keep = n <= thetas[l] && (l == 0 || n > thetas[l - 1]);
      if (!keep) std::fill(sec.row(i), sec.row(i) + sec.row_length(), cplx{});
    }
    out.push_back(sec.trimmed());
  }
  return out;
}

FourierSeries diagonal_part(const FourierKernel& M) {
  return M.column(Site(M.config().d, 0));
}

FourierKernel off_diagonal(const FourierKernel& M) {
  FourierKernel out = M;
  const std::size_t origin = M.box().index(Site(M.config().d, 0));
  std::fill(out.row(origin), out.row(origin) + out.row_length(), cplx{});
  return out;
}

ExpResult exp_kernel(const FourierKernel& W, double tol, const ExpOptions& options) {
  if (!(tol > 0.0)) throw Error(ErrorKind::domain, "exp tolerance must be positive");
  const double R = W.strip();
  const double w0 = norm(W, R, 0.0);
  const double ws = norm(W, R, options.s);
  const double x = tame_constant(options.s) * w0;

  // tail after J terms: sum_{j>J} j K^{j-1} w0^{j-1} ws / j! = ws sum_{i>=J} x^i/i!
  auto tail = [&](int J) {
    if (ws == 0.0) return 0.0;
    if (x >= J + 1) return std::numeric_limits<double>::infinity();
    double term = ws;
    for (int i = 1; i <= J; ++i) term *= x / i;
    return term / (1.0 - x / (J + 1));
  };

  ExpResult res{FourierKernel::identity(W.config(), R), 0.0, 0};
  FourierKernel term = FourierKernel::identity(W.config(), R);
  int J = 0;
  while (tail(J) >= tol) {
    if (J >= options.max_terms)
      throw Error(ErrorKind::divergence, "exponential series tail " + std::to_string(tail(J)) +
                                             " above tolerance after " + std::to_string(J) + " terms");
    ++J;
    term = product(term, W, options.policy);
    term *= 1.0 / J;
    res.value += term;
  }
  res.tail_bound = tail(J);
  res.terms = J;
  res.value.add_error_budget(res.tail_bound);
  return res;
}

double max_coeff_diff(const FourierKernel& a, const FourierKernel& b) {
  require_same_config(a, b);
  const int N = std::max(a.site_radius(), b.site_radius());
  const int K = std::max(a.mode_radius(), b.mode_radius());
  FourierKernel A = a.resized(N, K), B = b.resized(N, K);
  double m = 0.0;
  for (std::size_t i = 0; i < A.box().size(); ++i)
    for (std::size_t k = 0; k < A.row_length(); ++k) m = std::max(m, std::abs(A.row(i)[k] - B.row(i)[k]));
  return m;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& tok, int line) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw Error(ErrorKind::parse, "kernel line " + std::to_string(line) + ": bad number '" + tok + "'");
  return v;
}

}  // namespace

void write_kernel(std::ostream& out, const FourierKernel& M) {
  const LatticeConfig& cfg = M.config();
  out << "qpdiag-kernel 1\n";
  out << "d " << cfg.d << "\n";
  out << "R " << format_double(M.strip()) << "\n";
  out << "N_max " << M.site_radius() << "\n";
  out << "K_max " << M.mode_radius() << "\n";
  out << "omega";
  for (double w : cfg.omega) out << ' ' << format_double(w);
  out << "\n";
  out << "budget " << format_double(M.error_budget()) << "\n";
  out << "rows " << M.nonzeros() << "\n";
  const int K = M.mode_radius();
  for (std::size_t i = 0; i < M.box().size(); ++i) {
    const cplx* r = M.row(i);
    Site n;
    for (int k = -K; k <= K; ++k) {
      cplx c = r[k + K];
      if (c == 0.0) continue;
      if (n.empty()) n = M.box().site(i);
      for (int v : n) out << v << ' ';
      out << k << ' ' << format_double(c.real()) << ' ' << format_double(c.imag()) << "\n";
    }
  }
}

FourierKernel read_kernel(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next = [&](const std::string& key) {
    if (!std::getline(in, line)) throw Error(ErrorKind::parse, "kernel stream ended before '" + key + "'");
    ++lineno;
    std::istringstream ss(line);
    std::string k;
    ss >> k;
    if (k != key) throw Error(ErrorKind::parse, "kernel line " + std::to_string(lineno) + ": expected '" + key + "'");
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t) toks.push_back(t);
    return toks;
  };
  auto magic = next("qpdiag-kernel");
  if (magic.size() != 1 || magic[0] != "1") throw Error(ErrorKind::parse, "unsupported kernel format version");
  LatticeConfig cfg;
  cfg.d = std::stoi(next("d").at(0));
  double R = parse_double(next("R").at(0), lineno);
  int N = std::stoi(next("N_max").at(0));
  int K = std::stoi(next("K_max").at(0));
  auto om = next("omega");
  cfg.omega.clear();
  for (auto& t : om) cfg.omega.push_back(parse_double(t, lineno));
  double budget = parse_double(next("budget").at(0), lineno);
  std::size_t rows = std::stoull(next("rows").at(0));
  FourierKernel M(cfg, R, N, K);
  M.set_error_budget(budget);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw Error(ErrorKind::parse, "kernel stream truncated");
    ++lineno;
    std::istringstream ss(line);
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t) toks.push_back(t);
    if (static_cast<int>(toks.size()) != cfg.d + 3)
      throw Error(ErrorKind::parse, "kernel line " + std::to_string(lineno) + ": wrong column count");
    Site n(cfg.d);
    for (int i = 0; i < cfg.d; ++i) n[i] = std::stoi(toks[i]);
    int k = std::stoi(toks[cfg.d]);
    if (max_norm(n) > N || std::abs(k) > K)
      throw Error(ErrorKind::parse, "kernel line " + std::to_string(lineno) + ": index outside declared radii");
    M.set(n, k, {parse_double(toks[cfg.d + 1], lineno), parse_double(toks[cfg.d + 2], lineno)});
  }
  return M;
}

}  // namespace qpdiag
