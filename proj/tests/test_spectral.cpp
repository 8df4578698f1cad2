#include <doctest.h>

#include <cmath>
#include <sstream>

#include "generators.hpp"
#include "qpdiag/errors.hpp"
#include "qpdiag/iteration.hpp"
#include "qpdiag/spectral.hpp"

using namespace qpdiag;
using qpdiag::testing::Rng;

namespace {

const PerturbedPotential& tan_base() {
  static const PerturbedPotential V(BasePotential::tangent(), FourierSeries(), 0.25);
  return V;
}

const DiagonalizeResult& small_run() {
  static const DiagonalizeResult r = [] {
    const LatticeConfig cfg = golden_mean_lattice();
    const DiophantineCert c = diophantine_check(cfg.omega, 1.5, 1024);
    ScheduleParams p;
    p.gamma = c.gamma_eff;
    p.mono_lb = tan_base().mono_lb();
    ScheduleOverrides ov;
    ov.alpha = 4.2;
    return diagonalize(tan_base(), testing::power_kernel(cfg, 0.25, 12, 1e-2, 6.0), make_schedule(p, ov));
  }();
  return r;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::io;
}

}  // namespace

TEST_CASE("representation examples") {
  const LatticeConfig cfg = golden_mean_lattice();
  const double x = 0.1;
  const int L = 8;
  const LatticeOperator D = represent(FourierKernel(cfg, 0.25), tan_base(), x, L);
  CHECK(D.hermitian);
  for (int a = -L; a <= L; ++a)
    for (int b = -L; b <= L; ++b) {
      const cplx want = a == b ? std::tan(kPi * (x - a * cfg.omega[0])) : 0.0;
      CHECK(std::abs(D.H(a + L, b + L) - want) < 1e-12 * std::max(1.0, std::abs(want)));
    }

  const FourierKernel lap = FourierKernel::shift(cfg, 0.25, {1}) + FourierKernel::shift(cfg, 0.25, {-1});
  const LatticeOperator T = represent(lap, cplx(0.3, 0.1), L);
  for (int a = 0; a < 2 * L + 1; ++a)
    for (int b = 0; b < 2 * L + 1; ++b) CHECK(T.H(a, b) == cplx(std::abs(a - b) == 1 ? 1.0 : 0.0));

  CHECK(kind_of([&] { represent(lap, cplx(0.1, 0.3), L); }) == ErrorKind::phase_excluded);
  CHECK(kind_of([&] { represent(lap, tan_base(), 0.5 + 2 * cfg.omega[0], L); }) == ErrorKind::phase_excluded);
}

TEST_CASE("sum constants against zeta values") {
  for (double s : {0.75, 1.0, 2.3, 4.0}) {
    // the certified tail makes Y^2 an upper bound, exceeding the exact sum by at most the tail term
    const double T = 1e5;
    const double y1 = Y_squared(s, 1), e1 = 1.0 + 2.0 * std::riemann_zeta(2 * s);
    CHECK(y1 >= e1 * (1 - 1e-12));
    CHECK(y1 - e1 <= 2.0 * std::pow(T, 1 - 2 * s) / (2 * s - 1) * (1 + 1e-6) + 1e-13 * e1);
    if (s > 1.0) {
      const double y2 = Y_squared(s, 2), e2 = 1.0 + 8.0 * std::riemann_zeta(2 * s - 1);
      CHECK(y2 >= e2 * (1 - 1e-12));
      CHECK(y2 - e2 <= 12.0 * std::pow(T, 2 - 2 * s) / (2 * s - 2) * (1 + 1e-6) + 1e-13 * e2);
    }
  }
  CHECK(X_constant(2.3, 1.0, 1) ==
        doctest::Approx(std::sqrt(2.0 * (Y_squared(2.3, 1) + Y_squared(1.3, 1)))).epsilon(1e-15));
  CHECK(kind_of([] { X_constant(1.0, 0.6, 1); }) == ErrorKind::regularity);
}

TEST_CASE("weighted operator norm bound") {
  Rng rng(61);
  for (int t = 0; t < 30; ++t) {
    const int d = t % 3 == 0 ? 2 : 1;
    const LatticeConfig cfg = testing::lattice(d);
    const double R = 0.2;
    const FourierKernel M = testing::random_kernel(rng, cfg, R, d == 1 ? 6 : 2, 2, 0.6, 3.0);
    const cplx z(rng.uniform(), rng.uniform(-R, R));
    const LatticeOperator T = represent(M, z, d == 1 ? 20 : 5);
    for (double q : {0.0, 1.0}) {
      const double s = q + 0.5 * d + rng.uniform(0.1, 1.5);
      CHECK(weighted_operator_norm(T.H, T.box, q) <= X_constant(s, q, d) * norm(M, R, s) * (1 + 1e-12));
    }
  }
}

TEST_CASE("homomorphism and adjoint on interior blocks") {
  Rng rng(62);
  const LatticeConfig cfg = golden_mean_lattice();
  for (int t = 0; t < 10; ++t) {
    const FourierKernel A = testing::random_kernel(rng, cfg, 0.2, 4, 2), B = testing::random_kernel(rng, cfg, 0.2, 4, 2);
    const cplx z(rng.uniform(), rng.uniform(-0.1, 0.1));
    const int L = 20, I = L - 4;
    const Eigen::MatrixXcd P = represent(product_exact(A, B), z, L).H;
    const Eigen::MatrixXcd Q = represent(A, z, L).H * represent(B, z, L).H;
    double err = 0.0;
    for (int a = L - I; a <= L + I; ++a)
      for (int b = 0; b <= 2 * L; ++b) err = std::max(err, std::abs(P(a, b) - Q(a, b)));
    CHECK(err < 1e-12);

    const Eigen::MatrixXcd S = represent(involution(A), z, L).H;
    const Eigen::MatrixXcd Tz = represent(A, std::conj(z), L).H;
    CHECK((S - Tz.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("dense oracle") {
  LatticeOperator D;
  D.config = golden_mean_lattice();
  D.L = 1;
  D.box = SiteBox(1, 1);
  D.H = Eigen::MatrixXcd::Zero(3, 3);
  D.H(0, 0) = 2.0;
  D.H(1, 1) = -1.0;
  D.H(2, 2) = 0.5;
  const EigenPairs e = oracle_eigen(D);
  CHECK(e.values(0) == -1.0);
  CHECK(e.values(1) == 0.5);
  CHECK(e.values(2) == 2.0);
  CHECK(std::abs(e.vectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(e.vectors(2, 1)) == doctest::Approx(1.0));
  CHECK(std::abs(e.vectors(0, 2)) == doctest::Approx(1.0));
  CHECK(e.max_residual < 1e-14);

  LatticeOperator S = D;
  S.H = Eigen::MatrixXcd::Zero(2, 2);
  S.H(0, 1) = S.H(1, 0) = 1.0;
  const EigenPairs s = oracle_eigen(S);
  CHECK(s.values(0) == doctest::Approx(-1.0));
  CHECK(s.values(1) == doctest::Approx(1.0));

  S.H(0, 1) = cplx(0.0, 1.0);
  CHECK(kind_of([&] { oracle_eigen(S); }) == ErrorKind::domain);
}

TEST_CASE("eigenvalues match the diagonalized potential") {
  const DiagonalizeResult& r = small_run();
  const LatticeConfig cfg = golden_mean_lattice();
  const FourierKernel M = testing::power_kernel(cfg, 0.25, 12, 1e-2, 6.0);
  const LatticeOperator H = represent(M, tan_base(), 0.1, 48);
  const EigenPairs e = oracle_eigen(H);
  CHECK(e.max_residual < 1e-10);
  const EigenMatch m = match_eigenvalues(H, e, r.V_hat, 24);
  CHECK(m.peak_mismatches == 0);
  CHECK(m.max_error < 1e-6);

  const LatticeOperator H0 = represent(FourierKernel(cfg, 0.25), tan_base(), 0.1, 16);
  const EigenMatch m0 = match_eigenvalues(H0, oracle_eigen(H0), tan_base(), 8);
  CHECK(m0.max_error < 1e-12);
  CHECK(m0.peak_mismatches == 0);
}

TEST_CASE("eigenfunctions") {
  const LatticeConfig cfg = golden_mean_lattice();
  const FourierKernel one = FourierKernel::identity(cfg, 0.25);
  const EigenfunctionTable t0 = eigenfunctions(one, 0.1, 6, 2.3);
  CHECK((t0.phi - Eigen::MatrixXcd::Identity(13, 13)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(t0.gram_min == doctest::Approx(1.0));

  const DiagonalizeResult& r = small_run();
  const FourierKernel M = testing::power_kernel(cfg, 0.25, 12, 1e-2, 6.0);
  for (double x : {0.1, 0.3, 0.77}) {
    const LatticeOperator H = represent(M, tan_base(), x, 40);
    const EigenfunctionTable t = eigenfunctions(r.U_inv, x, 40, 4.5 - 1.5 - 0.7, &H, &r.V_hat);
    CHECK(t.decay_ratio <= 1.0);
    CHECK(t.residual < 1e-9);
    CHECK(t.gram_min > 0.9);
  }
}

TEST_CASE("evolution") {
  const LatticeConfig cfg = golden_mean_lattice();
  const FourierKernel one = FourierKernel::identity(cfg, 0.25);
  auto state = [](int L) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(2 * L + 1);
    psi(L) = 1.0;
    psi(L + 3) = cplx(0.0, 0.5);
    return psi;
  };
  const int L = 16;
  const Eigen::VectorXcd psi = state(L);
  const std::vector<double> grid = log_time_grid(200, 1e-2, 1e3);
  CHECK(grid.size() == 200);
  CHECK(grid[0] == 0.0);
  CHECK(grid[1] == doctest::Approx(1e-2));
  CHECK(grid.back() == doctest::Approx(1e3));

  const EvolveReport z = evolve(one, one, tan_base(), 0.1, psi, L, grid, {0.0, 1.0}, 2.3);
  for (std::size_t i = 0; i < z.qs.size(); ++i)
    for (double v : z.ratios[i]) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  const DiagonalizeResult& r = small_run();
  const EvolveReport e = evolve(r.U, r.U_inv, r.V_hat, 0.1, state(40), 40, grid, {0.0, 1.0}, 2.3);
  for (std::size_t i = 0; i < e.qs.size(); ++i) {
    CHECK(e.ratios[i][0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.sup[i] <= e.ceiling[i]);
    CHECK(e.slope[i] <= 1e-3);
  }
  CHECK(kind_of([&] { evolve(one, one, tan_base(), 0.1, psi, L, grid, {2.0}, 2.3); }) == ErrorKind::regularity);
}

TEST_CASE("integrated density of states") {
  auto closed = [](double E) { return 0.5 + std::atan(E) / kPi; };
  for (double E = -10.0; E <= 10.0; E += 0.37) {
    CHECK(std::abs(ids(tan_base(), E) - closed(E)) < 1e-10);
    // midpoint count of the sublevel set on a fine grid
    const int P = 200000;
    int cnt = 0;
    for (int j = 0; j < P; ++j)
      if (std::tan(kPi * ((j + 0.5) / P - 0.5)) <= E) ++cnt;
    CHECK(std::abs(double(cnt) / P - closed(E)) < 1e-5);
  }
  CHECK(ids(tan_base(), std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(ids(tan_base(), -std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(ids(tan_base(), 1e12) > 1.0 - 1e-11);
  CHECK(ids(tan_base(), -1e12) < 1e-11);

  Rng rng(63);
  FourierSeries h(2);
  h.set(1, 0.1);
  h.set(-1, 0.1);
  h.set(2, cplx(0.0, 0.05));
  h.set(-2, cplx(0.0, -0.05));
  const PerturbedPotential V(BasePotential::tangent(), h, 0.25);
  double prev = -1.0;
  for (double E = -20.0; E <= 20.0; E += 0.25) {
    const double k = ids(V, E);
    CHECK(k >= prev);
    prev = k;
  }
  for (int t = 0; t < 500; ++t) {
    const double E1 = rng.uniform(-10, 10), E2 = E1 + (t % 2 ? rng.uniform(-1e-3, 1e-3) : rng.uniform(-10, 10));
    if (E1 == E2) continue;
    CHECK(std::abs(ids(V, E1) - ids(V, E2)) / std::abs(E1 - E2) <= 2.0 / V.mono_lb() + 1e-6);
  }
}

TEST_CASE("finite-volume counting") {
  const LatticeConfig cfg = golden_mean_lattice();
  const double x = 0.3;
  for (int L : {8, 20})
    for (double E : {-3.0, -0.4, 0.0, 1.7}) {
      int cnt = 0;
      for (int n = -L; n <= L; ++n)
        if (std::tan(kPi * (x - n * cfg.omega[0])) <= E) ++cnt;
      CHECK(ids_finite(FourierKernel(cfg, 0.25), tan_base(), x, L, E) == doctest::Approx(double(cnt) / (2 * L + 1)));
    }
  // counting on H and on its conjugated diagonal agree as L grows
  const DiagonalizeResult& r = small_run();
  const FourierKernel M = testing::power_kernel(cfg, 0.25, 12, 1e-2, 6.0);
  for (double E : {-1.0, 0.5}) {
    const int L = 64;
    int cnt = 0;
    for (int n = -L; n <= L; ++n)
      if (r.V_hat.eval_raw(x - n * cfg.omega[0]).real() <= E) ++cnt;
    CHECK(std::abs(ids_finite(M, tan_base(), x, L, E) - double(cnt) / (2 * L + 1)) <= 2.0 / (2 * L + 1));
  }
}

TEST_CASE("spectrum fills energy windows") {
  const LatticeConfig cfg = golden_mean_lattice();
  double prev = 1e300;
  for (int L : {16, 32, 64, 128}) {
    std::vector<double> v{-1.0, 1.0};
    for (int n = -L; n <= L; ++n) {
      const double e = std::tan(kPi * (0.1 - n * cfg.omega[0]));
      if (std::abs(e) <= 1.0) v.push_back(e);
    }
    std::sort(v.begin(), v.end());
    double gap = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) gap = std::max(gap, v[i] - v[i - 1]);
    CHECK(gap <= prev);
    prev = gap;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("matrix serialization") {
  Rng rng(64);
  const FourierKernel M = testing::random_kernel(rng, golden_mean_lattice(), 0.2, 3, 1);
  const LatticeOperator H = represent(M, cplx(0.2, 0.05), 7);
  std::stringstream ss;
  write_matrix(ss, H);
  CHECK(ss.str().substr(0, 8) == "QPOPMAT1");
  CHECK(ss.str().size() == 8 + 16 + 15 * 15 * 16);
  const LatticeOperator B = read_matrix(ss);
  CHECK(B.L == 7);
  CHECK(B.config.d == 1);
  CHECK(B.H == H.H);
  std::stringstream bad("QPOPMAT2xxxxxxxxxxxx");
  CHECK_THROWS_AS(read_matrix(bad), Error);
}
