#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "qpdiag/lattice.hpp"

namespace qpdiag {

// One-variable 1-periodic function sum_k c_k e^{2 pi i k z}, |k| <= K.
class FourierSeries {
 public:
  FourierSeries() : K_(0), c_(1, 0.0) {}
  explicit FourierSeries(int K) : K_(K), c_(2 * K + 1, 0.0) {}
  static FourierSeries constant(cplx value);

  int mode_radius() const { return K_; }
  cplx coeff(int k) const { return (k < -K_ || k > K_) ? cplx{} : c_[k + K_]; }
  void set(int k, cplx value);
  const std::vector<cplx>& data() const { return c_; }

  cplx eval(cplx z) const;
  cplx derivative(cplx z) const;
  // coefficient norm sum_k |c_k| e^{2 pi |k| R}
  double norm(double R) const;
  bool is_zero() const;

  FourierSeries& operator+=(const FourierSeries& other);
  friend FourierSeries operator+(FourierSeries a, const FourierSeries& b) { return a += b; }

 private:
  int K_;
  std::vector<cplx> c_;
};

struct WeightedNormValue {
  double value = 0.0;
  double R = 0.0;
  double s = 0.0;
  operator double() const { return value; }
};

// Truncation applied after products: radii caps (negative = uncapped) and a
// drop threshold relative to the result's Ñ_{R,0}.
struct TruncationPolicy {
  int max_site_radius = -1;
  int max_mode_radius = -1;
  double drop_relative = 1e-16;
};

class FourierKernel {
 public:
  FourierKernel() = default;
  FourierKernel(LatticeConfig config, double R, int site_radius = 0, int mode_radius = 0);

  static FourierKernel identity(const LatticeConfig& config, double R);
  static FourierKernel shift(const LatticeConfig& config, double R, const Site& e);
  static FourierKernel diagonal(const LatticeConfig& config, double R, const FourierSeries& f);

  const LatticeConfig& config() const { return config_; }
  double strip() const { return R_; }
  int site_radius() const { return box_.radius(); }
  int mode_radius() const { return K_; }
  const SiteBox& box() const { return box_; }
  std::size_t row_length() const { return static_cast<std::size_t>(2 * K_ + 1); }

  cplx coeff(const Site& n, int k) const;
  void set(const Site& n, int k, cplx value);
  void add(const Site& n, int k, cplx value);
  const cplx* row(std::size_t site_index) const { return coeffs_.data() + site_index * row_length(); }
  cplx* row(std::size_t site_index) { return coeffs_.data() + site_index * row_length(); }
  // n·ω of each stored site, in box order
  const std::vector<double>& phases() const { return site_dot_; }
  const std::vector<int>& site_norms() const { return site_norm_; }

  cplx eval(cplx z, const Site& n) const;
  FourierSeries column(const Site& n) const;

  double error_budget() const { return budget_; }
  void add_error_budget(double b) { budget_ += b; }
  void set_error_budget(double b) { budget_ = b; }

  bool is_zero() const;
  std::size_t nonzeros() const;
  // smallest radii containing all nonzero coefficients
  int support_site_radius() const;
  int support_mode_radius() const;

  FourierKernel with_strip(double R) const;
  // re-box to the given radii; coefficients that fall outside are dropped and
  // their Ñ_{R,0} mass is added to the error budget
  FourierKernel resized(int site_radius, int mode_radius) const;
  FourierKernel trimmed() const;

  FourierKernel& operator+=(const FourierKernel& other);
  FourierKernel& operator-=(const FourierKernel& other);
  FourierKernel& operator*=(cplx factor);
  friend FourierKernel operator+(FourierKernel a, const FourierKernel& b) { return a += b; }
  friend FourierKernel operator-(FourierKernel a, const FourierKernel& b) { return a -= b; }
  friend FourierKernel operator*(cplx f, FourierKernel a) { return a *= f; }
  FourierKernel operator-() const;

 private:
  void rebuild_dots();
  void grow_to(int site_radius, int mode_radius);

  LatticeConfig config_;
  double R_ = 0.0;
  SiteBox box_{1, 0};
  int K_ = 0;
  std::vector<cplx> coeffs_ = std::vector<cplx>(1, 0.0);
  std::vector<double> site_dot_ = std::vector<double>(1, 0.0);
  std::vector<int> site_norm_ = std::vector<int>(1, 0);
  double budget_ = 0.0;
};

// Ñ_{R,s}(M) = sum_n <n>^s sum_k |c(n,k)| e^{2 pi |k| R}
WeightedNormValue norm(const FourierKernel& M, double R, double s);
inline WeightedNormValue norm(const FourierKernel& M, double s) { return norm(M, M.strip(), s); }

FourierKernel product(const FourierKernel& a, const FourierKernel& b, const TruncationPolicy& policy = {});
FourierKernel product_exact(const FourierKernel& a, const FourierKernel& b);
FourierKernel involution(const FourierKernel& M);

FourierKernel smooth(const FourierKernel& M, double theta);
FourierKernel smooth_complement(const FourierKernel& M, double theta);
std::vector<FourierKernel> sections(const FourierKernel& M, const std::vector<double>& thetas);

FourierSeries diagonal_part(const FourierKernel& M);
FourierKernel off_diagonal(const FourierKernel& M);

struct ExpOptions {
  double s = 0.0;
  int max_terms = 200;
  TruncationPolicy policy{};
};

struct ExpResult {
  FourierKernel value;
  double tail_bound = 0.0;
  int terms = 0;
};

ExpResult exp_kernel(const FourierKernel& W, double tol, const ExpOptions& options = {});

// largest coefficient modulus of a - b over the union of supports
double max_coeff_diff(const FourierKernel& a, const FourierKernel& b);

void write_kernel(std::ostream& out, const FourierKernel& M);
FourierKernel read_kernel(std::istream& in);

}  // namespace qpdiag
