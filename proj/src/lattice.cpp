#include "qpdiag/lattice.hpp"

#include <cstdlib>
#include <string>

#include "qpdiag/errors.hpp"

namespace qpdiag {

void LatticeConfig::validate() const {
  if (d < 1) throw Error(ErrorKind::config, "lattice dimension must be positive");
  if (static_cast<int>(omega.size()) != d)
    throw Error(ErrorKind::config, "frequency vector has " + std::to_string(omega.size()) +
                                       " components, expected " + std::to_string(d));
  for (double w : omega)
    if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorKind::config, "frequency component outside [0,1]");
}

double LatticeConfig::dot(const Site& n) const {
  double acc = 0.0;
  for (int i = 0; i < d; ++i) acc += n[i] * omega[i];
  return acc;
}

LatticeConfig golden_mean_lattice() { return LatticeConfig{1, {(std::sqrt(5.0) - 1.0) / 2.0}}; }

int max_norm(const Site& n) {
  int m = 0;
  for (int v : n) m = std::max(m, std::abs(v));
  return m;
}

SiteBox::SiteBox(int d, int radius) : d_(d), radius_(radius), strides_(d) {
  if (d < 1 || radius < 0) throw Error(ErrorKind::config, "invalid site box");
  std::size_t s = 1;
  for (int i = d - 1; i >= 0; --i) {
    strides_[i] = s;
    s *= static_cast<std::size_t>(2 * radius + 1);
  }
  size_ = s;
}

Site SiteBox::site(std::size_t index) const {
  Site n(d_);
  for (int i = 0; i < d_; ++i) {
    n[i] = static_cast<int>(index / strides_[i]) - radius_;
    index %= strides_[i];
  }
  return n;
}

bool SiteBox::contains(const Site& n) const {
  for (int v : n)
    if (std::abs(v) > radius_) return false;
  return true;
}

std::size_t SiteBox::index(const Site& n) const {
  std::size_t idx = 0;
  for (int i = 0; i < d_; ++i) idx += static_cast<std::size_t>(n[i] + radius_) * strides_[i];
  return idx;
}

}  // namespace qpdiag
