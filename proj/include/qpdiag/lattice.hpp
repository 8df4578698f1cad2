#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace qpdiag {

using cplx = std::complex<double>;
using Site = std::vector<int>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct LatticeConfig {
  int d = 1;
  std::vector<double> omega{0.0};

  void validate() const;
  double dot(const Site& n) const;
  bool operator==(const LatticeConfig& other) const {
    return d == other.d && omega == other.omega;
  }
  bool operator!=(const LatticeConfig& other) const { return !(*this == other); }
};

LatticeConfig golden_mean_lattice();

// max-norm |n| and the bracket <n> = max(1, |n|)
int max_norm(const Site& n);
inline double bracket(const Site& n) { return std::max(1, max_norm(n)); }
inline double bracket(double t) { return std::max(1.0, t); }

// distance to the nearest integer
inline double torus_norm(double a) { return std::abs(a - std::nearbyint(a)); }

// tame constant K(s) = 2^{max(0, s-1)}
inline double tame_constant(double s) { return std::pow(2.0, std::max(0.0, s - 1.0)); }

// Lexicographic enumeration of the box [-N, N]^d; the first coordinate is the
// most significant one.
class SiteBox {
 public:
  SiteBox() = default;
  SiteBox(int d, int radius);

  int dim() const { return d_; }
  int radius() const { return radius_; }
  std::size_t size() const { return size_; }
  int side() const { return 2 * radius_ + 1; }

  Site site(std::size_t index) const;
  bool contains(const Site& n) const;
  std::size_t index(const Site& n) const;
  // flat stride of coordinate i
  std::size_t stride(int i) const { return strides_[i]; }

 private:
  int d_ = 1;
  int radius_ = 0;
  std::size_t size_ = 1;
  std::vector<std::size_t> strides_{1};
};

}  // namespace qpdiag
