#include <doctest.h>

#include "generators.hpp"
#include "qpdiag/errors.hpp"
#include "qpdiag/smalldiv.hpp"

using namespace qpdiag;
using qpdiag::testing::Rng;

namespace {

const PerturbedPotential& tan_base() {
  static const PerturbedPotential V(BasePotential::tangent(), FourierSeries(), 0.2);
  return V;
}

const DiophantineCert& golden_cert() {
  static const DiophantineCert c = diophantine_check(golden_mean_lattice().omega, 1.5, 1024);
  return c;
}

}  // namespace

TEST_CASE("rational frequency is resonant") {
  try {
    diophantine_check({1.0 / 3.0}, 1.5, 100);
    FAIL("expected resonance");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::resonance);
    CHECK(std::string(e.what()).find('3') != std::string::npos);
  }
  CHECK_THROWS_AS(diophantine_check({0.3}, 1.0, 10), Error);
  CHECK_THROWS_AS(diophantine_check({0.3}, 1.5, 0), Error);
}

TEST_CASE("golden mean certificate against brute force") {
  const double w = golden_mean_lattice().omega[0];
  const DiophantineCert c = diophantine_check({w}, 2.0, 10000);
  double g = 1e300;
  for (long n = 1; n <= 10000; ++n) {
    const double x = n * w;
    g = std::min(g, double(n) * double(n) * std::abs(x - std::round(x)));
  }
  CHECK(c.gamma_eff > 0.0);
  CHECK(c.gamma_eff == doctest::Approx(g).epsilon(1e-9));
  CHECK(c.N_check == 10000);

  const DiophantineCert c15 = diophantine_check({w}, 1.5, 10000);
  CHECK(c.gamma_eff >= c15.gamma_eff);

  const DiophantineCert c2 = diophantine_check(testing::lattice(2).omega, 2.5, 40);
  double g2 = 1e300;
  const LatticeConfig cfg = testing::lattice(2);
  for (int a = -40; a <= 40; ++a)
    for (int b = -40; b <= 40; ++b) {
      if (a == 0 && b == 0) continue;
      g2 = std::min(g2, std::pow(std::max(std::abs(a), std::abs(b)), 2.5) * torus_norm(cfg.dot({a, b})));
    }
  CHECK(c2.gamma_eff == doctest::Approx(g2).epsilon(1e-9));
}

TEST_CASE("diagonal kernel gives zero W") {
  FourierKernel M(golden_mean_lattice(), 0.2, 0, 3);
  M.set({0}, 1, 0.3);
  M.set({0}, -2, 0.1);
  const HomologicalResult r = solve_homological(M, tan_base(), 8.0, golden_cert());
  CHECK(r.W.is_zero());
}

TEST_CASE("pointwise quotient for a unit shift") {
  const LatticeConfig cfg = golden_mean_lattice();
  FourierKernel M(cfg, 0.2, 1, 0);
  M.set({1}, 0, 1.0);
  const HomologicalResult r = solve_homological(M, tan_base(), 1.0, golden_cert());
  const double w = cfg.omega[0];
  for (int j = 0; j < 64; ++j) {
    const double x = (j + 0.25) / 64.0 - 0.5;
    const cplx z(x, 0.0);
    const cplx oracle = 1.0 / (std::tan(kPi * z) - std::tan(kPi * (z - w)));
    CHECK(std::abs(r.W.eval(z, {1}) - oracle) < 1e-12);
  }
  CHECK(std::abs(r.W.eval(cplx(0.1, 0.1), {1}) - 1.0 / (std::tan(kPi * cplx(0.1, 0.1)) - std::tan(kPi * (cplx(0.1, 0.1) - w)))) < 1e-12);
}

TEST_CASE("homological equation on random kernels") {
  Rng rng(41);
  FourierSeries h(2);
  h.set(1, 0.05);
  h.set(-1, 0.05);
  const PerturbedPotential Vp(BasePotential::tangent(), h, 0.2);
  for (int trial = 0; trial < 12; ++trial) {
    const LatticeConfig cfg = testing::lattice(1);
    const bool perturbed = trial % 2 == 1;
    const PerturbedPotential& V = perturbed ? Vp : tan_base();
    const FourierKernel M = testing::random_kernel(rng, cfg, 0.2, 6, 3);
    const double theta = rng.uniform(1.0, 6.0);
    HomologicalOptions opt;
    opt.mode_radius = 24;
    const HomologicalResult r = solve_homological(M, V, theta, golden_cert(), opt);

    CHECK(r.W.support_site_radius() <= static_cast<int>(std::floor(theta)));
    for (int k = -r.W.mode_radius(); k <= r.W.mode_radius(); ++k) CHECK(r.W.coeff({0}, k) == 0.0);

    const FourierKernel Mt = off_diagonal(smooth(M, theta));
    for (int t = 0; t < 20; ++t) {
      const int n = rng.integer(1, static_cast<int>(std::floor(theta))) * (rng.coin() ? 1 : -1);
      const double x = rng.uniform(-0.5, 0.5);
      const cplx z(x, 0.0);
      if (V.pole_distance(z) < 1e-2 || V.pole_distance(z - cfg.dot({n})) < 1e-2) continue;
      const cplx comm = r.W.eval(z, {n}) * (V.eval_raw(z - cfg.dot({n})) - V.eval_raw(z));
      const cplx rhs = -Mt.eval(z, {n});
      const double scale = std::max({std::abs(rhs), std::abs(r.W.eval(z, {n}) * V.eval_raw(z)), 1e-3});
      CHECK(std::abs(comm - rhs) <= (perturbed ? 1e-7 : 1e-9) * scale);
    }
    CHECK(r.report.floor_ratio >= 1.0 - 1e-9);
    CHECK(r.report.bound_ratio <= 1.0 + 1e-9);
    // divisor floor against the certificate
    for (int n = 1; n <= static_cast<int>(std::floor(theta)); ++n)
      for (int j = 0; j < 32; ++j) {
        const double x = (j + 0.5) / 32.0;
        if (V.pole_distance(x) < 1e-6 || V.pole_distance(x - cfg.dot({n})) < 1e-6) continue;
        const double div = std::abs(V.eval_raw(x) - V.eval_raw(x - cfg.dot({n})));
        CHECK(div >= V.mono_lb() * golden_cert().gamma_eff / std::pow(n, 1.5) * (1 - 1e-9));
      }
  }
}

TEST_CASE("self-adjoint data give anti-self-adjoint W") {
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const FourierKernel M = testing::self_adjoint_part(testing::random_kernel(rng, golden_mean_lattice(), 0.2, 5, 3));
    const HomologicalResult r = solve_homological(M, tan_base(), 5.0, golden_cert());
    CHECK(max_coeff_diff(involution(r.W), -r.W) <= 1e-12 * std::max(1.0, norm(r.W, 0.0, 0.0).value));
  }
}

TEST_CASE("solver preconditions") {
  const FourierKernel M = FourierKernel::shift(golden_mean_lattice(), 0.2, {1});
  const DiophantineCert small = diophantine_check(golden_mean_lattice().omega, 1.5, 4);
  CHECK_THROWS_AS(solve_homological(M, tan_base(), 5.0, small), Error);
  const FourierKernel Mn = FourierKernel::shift(golden_mean_lattice(), 0.1, {1});
  CHECK_THROWS_AS(solve_homological(Mn, tan_base(), 2.0, golden_cert()), Error);
}
