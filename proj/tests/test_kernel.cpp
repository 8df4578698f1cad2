#include <doctest.h>

#include <sstream>

#include "generators.hpp"
#include "qpdiag/errors.hpp"
#include "qpdiag/kernel.hpp"

using namespace qpdiag;
using qpdiag::testing::Rng;

namespace {

// pointwise oracle for the twisted product: (AB)(z,n) = sum_l A(z,l) B(z - l·ω, n - l)
cplx product_at(const FourierKernel& A, const FourierKernel& B, cplx z, const Site& n) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < A.box().size(); ++i) {
    const Site l = A.box().site(i);
    Site m(n.size());
    for (std::size_t c = 0; c < n.size(); ++c) m[c] = n[c] - l[c];
    if (!B.box().contains(m)) continue;
    acc += A.eval(z, l) * B.eval(z - A.config().dot(l), m);
  }
  return acc;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

TEST_CASE("norm of elementary kernels") {
  const LatticeConfig cfg = golden_mean_lattice();
  for (double R : {0.0, 0.1, 0.3})
    for (double s : {0.0, 1.0, 2.5}) {
      CHECK(norm(FourierKernel::identity(cfg, R), R, s).value == doctest::Approx(1.0));
      FourierKernel lap = FourierKernel::shift(cfg, R, {1}) + FourierKernel::shift(cfg, R, {-1});
      CHECK(norm(lap, R, s).value == doctest::Approx(2.0));
      FourierKernel M(cfg, R, 3, 1);
      M.set({3}, 1, 1.0);
      CHECK(norm(M, R, s).value == doctest::Approx(std::exp(kTwoPi * R) * std::pow(3.0, s)).epsilon(1e-14));
    }
  FourierKernel M(cfg, 0.1, 1, 1);
  CHECK_THROWS_AS(norm(M, 0.2, 0.0), Error);
  try {
    norm(M, 0.2, 0.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::strip_exceeded);
  }
}

TEST_CASE("product examples") {
  const LatticeConfig cfg = golden_mean_lattice();
  Rng rng(11);
  const FourierKernel M = testing::random_kernel(rng, cfg, 0.2, 3, 2);
  const FourierKernel one = FourierKernel::identity(cfg, 0.2);
  CHECK(max_coeff_diff(product(one, M), M) == 0.0);
  CHECK(max_coeff_diff(product(M, one), M) == 0.0);

  const FourierKernel U2 = FourierKernel::shift(cfg, 0.2, {2}), U3 = FourierKernel::shift(cfg, 0.2, {-3});
  CHECK(max_coeff_diff(product(U2, U3), FourierKernel::shift(cfg, 0.2, {-1})) == 0.0);

  FourierSeries f(2), g(1);
  f.set(1, {0.3, -0.2});
  f.set(-2, 0.7);
  g.set(0, 1.5);
  g.set(1, {0.0, 0.4});
  FourierKernel fU(cfg, 0.2, 1, 2);
  for (int k = -2; k <= 2; ++k) fU.set({1}, k, f.coeff(k));
  const FourierKernel P = product(fU, FourierKernel::diagonal(cfg, 0.2, g));
  for (double x : {0.0, 0.13, 0.71}) {
    const cplx z(x, 0.05);
    CHECK(std::abs(P.eval(z, {1}) - f.eval(z) * g.eval(z - cfg.omega[0])) < 1e-14);
  }

  LatticeConfig other{1, {0.3}};
  CHECK_THROWS_AS(product(M, FourierKernel::identity(other, 0.2)), Error);
}

TEST_CASE("product matches the pointwise twisted convolution") {
  Rng rng(12);
  for (int d : {1, 2}) {
    const LatticeConfig cfg = testing::lattice(d);
    for (int trial = 0; trial < 5; ++trial) {
      const FourierKernel A = testing::random_kernel(rng, cfg, 0.15, d == 1 ? 4 : 2, 2);
      const FourierKernel B = testing::random_kernel(rng, cfg, 0.15, d == 1 ? 3 : 2, 3);
      const FourierKernel P = product_exact(A, B);
      for (int t = 0; t < 6; ++t) {
        const cplx z(rng.uniform(), rng.uniform(-0.15, 0.15));
        const Site n = P.box().site(static_cast<std::size_t>(rng.integer(0, static_cast<int>(P.box().size()) - 1)));
        CHECK(std::abs(P.eval(z, n) - product_at(A, B, z, n)) < 1e-12);
      }
    }
  }
}

TEST_CASE("involution examples and pointwise definition") {
  const LatticeConfig cfg = golden_mean_lattice();
  const FourierKernel one = FourierKernel::identity(cfg, 0.2);
  CHECK(max_coeff_diff(involution(one), one) == 0.0);
  CHECK(max_coeff_diff(involution(FourierKernel::shift(cfg, 0.2, {2})), FourierKernel::shift(cfg, 0.2, {-2})) < 1e-15);

  Rng rng(13);
  for (int d : {1, 2}) {
    const LatticeConfig c = testing::lattice(d);
    const FourierKernel M = testing::random_kernel(rng, c, 0.2, 2, 3);
    const FourierKernel S = involution(M);
    CHECK(max_coeff_diff(involution(S), M) < 1e-15);
    for (int t = 0; t < 8; ++t) {
      const cplx z(rng.uniform(), rng.uniform(-0.2, 0.2));
      const Site n = S.box().site(static_cast<std::size_t>(rng.integer(0, static_cast<int>(S.box().size()) - 1)));
      Site mn(n.size());
      for (std::size_t i = 0; i < n.size(); ++i) mn[i] = -n[i];
      CHECK(std::abs(S.eval(z, n) - std::conj(M.eval(std::conj(z) - c.dot(n), mn))) < 1e-13);
    }
  }
}

TEST_CASE("algebra laws on random pairs") {
  Rng rng(14);
  int checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const int d = trial % 2 ? 2 : 1;
    const LatticeConfig cfg = testing::lattice(d);
    const double R = rng.uniform(0.0, 0.3);
    const FourierKernel A = testing::random_kernel(rng, cfg, R, rng.integer(0, d == 1 ? 5 : 2), rng.integer(0, 3));
    const FourierKernel B = testing::random_kernel(rng, cfg, R, rng.integer(0, d == 1 ? 5 : 2), rng.integer(0, 3));
    const FourierKernel P = product_exact(A, B);
    for (double s : {0.0, 1.0, 2.5}) {
      const double K = tame_constant(s);
      const double lhs = norm(P, R, s);
      const double rhs = K * (norm(A, R, 0.0) * norm(B, R, s) + norm(A, R, s) * norm(B, R, 0.0));
      CHECK(lhs <= rhs * (1 + 1e-12));
      CHECK(rel(norm(involution(A), R, s), norm(A, R, s)) < 1e-13);
    }
    CHECK(norm(P, R, 0.0) <= norm(A, R, 0.0) * norm(B, R, 0.0) * (1 + 1e-12));
    const FourierKernel lhs = involution(P), rhs = product_exact(involution(B), involution(A));
    CHECK(max_coeff_diff(lhs, rhs) <= 1e-12 * std::max(1.0, norm(P, 0.0, 0.0).value));
    ++checked;
  }
  CHECK(checked == 120);
}

TEST_CASE("smoothing and sections") {
  const LatticeConfig cfg = golden_mean_lattice();
  Rng rng(15);
  const FourierKernel M = testing::random_kernel(rng, cfg, 0.1, 6, 2, 1.0);
  CHECK(max_coeff_diff(smooth(M, 6.0), M) == 0.0);
  const FourierKernel S0 = smooth(M, 0.0);
  CHECK(S0.support_site_radius() == 0);
  CHECK(S0.column({0}).data() == M.column({0}).data());

  const std::vector<FourierKernel> one = sections(M, {7.0});
  REQUIRE(one.size() == 1);
  CHECK(max_coeff_diff(one[0], M) == 0.0);

  const FourierKernel lap = FourierKernel::shift(cfg, 0.1, {1}) + FourierKernel::shift(cfg, 0.1, {-1});
  const auto secs = sections(lap, {0.0, 1.0});
  CHECK(secs[0].is_zero());
  CHECK(max_coeff_diff(secs[1], lap) == 0.0);

  CHECK_THROWS_AS(sections(M, {1.0, 1.0}), Error);
  CHECK_THROWS_AS(sections(M, {-1.0, 2.0}), Error);

  // telescoping
  const std::vector<double> th{0.5, 1.5, 2.5, 4.0};
  const auto parts = sections(M, th);
  FourierKernel sum(cfg, 0.1);
  for (const auto& p : parts) sum += p;
  CHECK(max_coeff_diff(sum, smooth(M, 4.0)) == 0.0);
}

TEST_CASE("smoothing inequalities on random kernels") {
  Rng rng(16);
  for (int trial = 0; trial < 60; ++trial) {
    const LatticeConfig cfg = testing::lattice(trial % 3 == 0 ? 2 : 1);
    const double R = rng.uniform(0.0, 0.2);
    const FourierKernel M = testing::random_kernel(rng, cfg, R, cfg.d == 1 ? 8 : 3, 2);
    const double theta = rng.uniform(0.0, cfg.d == 1 ? 8.0 : 3.0);
    const double a = rng.uniform(0.0, 3.0), b = rng.uniform(0.0, 3.0);
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double bt = bracket(theta);
    CHECK(norm(smooth(M, theta), R, hi) <= std::pow(bt, hi - lo) * norm(M, R, lo) * (1 + 1e-12));
    CHECK(norm(smooth_complement(M, theta), R, lo) <= std::pow(bt, lo - hi) * norm(M, R, hi) * (1 + 1e-12));
  }
}

TEST_CASE("exponential") {
  const LatticeConfig cfg = golden_mean_lattice();
  const FourierKernel zero(cfg, 0.1);
  const ExpResult e0 = exp_kernel(zero, 1e-15);
  CHECK(max_coeff_diff(e0.value, FourierKernel::identity(cfg, 0.1)) == 0.0);

  const cplx c(0.3, 0.1);
  const ExpResult e = exp_kernel(c * FourierKernel::shift(cfg, 0.1, {1}), 1e-17);
  double fact = 1.0;
  cplx pw = 1.0;
  for (int m = 0; m <= 8; ++m) {
    if (m > 0) {
      fact *= m;
      pw *= c;
    }
    CHECK(std::abs(e.value.coeff({m}, 0) - pw / fact) < 1e-16);
  }

  Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    const FourierKernel W = testing::random_kernel(rng, cfg, 0.1, 3, 1, 0.6, 2.0, 0.1);
    const double tol = 1e-13;
    const FourierKernel P = product_exact(exp_kernel(W, tol).value, exp_kernel(-W, tol).value);
    CHECK(norm(P - FourierKernel::identity(cfg, 0.1), 0.1, 0.0) < 2 * tol);
  }

  ExpOptions few;
  few.max_terms = 3;
  CHECK_THROWS_AS(exp_kernel(cplx(3.0) * FourierKernel::shift(cfg, 0.1, {1}), 1e-15, few), Error);
}

TEST_CASE("product of exponentials bound") {
  Rng rng(18);
  const LatticeConfig cfg = golden_mean_lattice();
  for (int t = 0; t < 10; ++t) {
    const double s = rng.uniform(0.0, 2.5);
    std::vector<FourierKernel> W;
    double s0 = 0.0, ss = 0.0;
    FourierKernel prod = FourierKernel::identity(cfg, 0.1);
    for (int m = 0; m < 3; ++m) {
      W.push_back(testing::random_kernel(rng, cfg, 0.1, 3, 1, 0.6, 2.0, 0.05));
      s0 += norm(W.back(), 0.1, 0.0);
      ss += norm(W.back(), 0.1, s);
      prod = product_exact(prod, exp_kernel(W.back(), 1e-18).value);
    }
    CHECK(norm(prod - FourierKernel::identity(cfg, 0.1), 0.1, s) <= std::exp(tame_constant(s) * s0) * ss * (1 + 1e-10));
  }
}

TEST_CASE("coefficient norm dominates the boundary sup") {
  Rng rng(19);
  for (int t = 0; t < 10; ++t) {
    const LatticeConfig cfg = testing::lattice(1);
    const double R = rng.uniform(0.0, 0.2), s = rng.uniform(0.0, 2.0);
    const FourierKernel M = testing::random_kernel(rng, cfg, R, 4, 3);
    double grid = 0.0;
    for (double sign : {-1.0, 1.0})
      for (int j = 0; j < 64; ++j) {
        const cplx z(j / 64.0, sign * R);
        double acc = 0.0;
        for (std::size_t i = 0; i < M.box().size(); ++i) acc += std::abs(M.eval(z, M.box().site(i))) * std::pow(bracket(M.box().site(i)), s);
        grid = std::max(grid, acc);
      }
    CHECK(grid <= norm(M, R, s) * (1 + 1e-12));
  }
}

TEST_CASE("truncation budget and empty kernel") {
  const LatticeConfig cfg = golden_mean_lattice();
  Rng rng(20);
  const FourierKernel M = testing::random_kernel(rng, cfg, 0.1, 5, 2, 1.0);
  const FourierKernel r = M.resized(2, 1);
  const double dropped = norm(M, 0.1, 0.0) - norm(r, 0.1, 0.0);
  CHECK(r.error_budget() == doctest::Approx(dropped).epsilon(1e-12));

  const FourierKernel empty(cfg, 0.1);
  CHECK(empty.is_zero());
  CHECK(norm(empty, 0.1, 2.0).value == 0.0);
  CHECK(product(empty, M).is_zero());
  CHECK(involution(empty).is_zero());
  CHECK(smooth(empty, 3.0).is_zero());
}

TEST_CASE("kernel serialization round-trips bit-exactly") {
  Rng rng(21);
  for (int d : {1, 2}) {
    const FourierKernel M = testing::random_kernel(rng, testing::lattice(d), 0.17, 2, 2);
    std::stringstream ss;
    write_kernel(ss, M);
    const FourierKernel back = read_kernel(ss);
    CHECK(back.strip() == M.strip());
    CHECK(back.config() == M.config());
    CHECK(max_coeff_diff(back, M) == 0.0);
  }
  std::stringstream bad("qpdiag-kernel 2\n");
  CHECK_THROWS_AS(read_kernel(bad), Error);
}
