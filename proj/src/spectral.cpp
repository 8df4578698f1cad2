#include "qpdiag/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "qpdiag/errors.hpp"

namespace qpdiag {

namespace {

void fill_kernel(LatticeOperator& op, const FourierKernel& M) {
  const LatticeConfig& cfg = op.config;
  const SiteBox& box = op.box;
  const int K = M.mode_radius();
  std::vector<cplx> wpow(2 * K + 1);
  std::vector<std::size_t> rows;
  for (std::size_t j = 0; j < M.box().size(); ++j) {
    const cplx* r = M.row(j);
    if (std::any_of(r, r + M.row_length(), [](cplx c) { return c != 0.0; })) rows.push_back(j);
  }
  for (std::size_t a = 0; a < box.size(); ++a) {
    const Site n = box.site(a);
    const cplx zn = op.z - cfg.dot(n);
    const cplx w = std::exp(cplx(0.0, kTwoPi) * zn);
    wpow[K] = 1.0;
    for (int k = 1; k <= K; ++k) {
      wpow[K + k] = wpow[K + k - 1] * w;
      wpow[K - k] = wpow[K - k + 1] / w;
    }
    for (std::size_t j : rows) {
      const Site m = M.box().site(j);
      Site l(n.size());
      bool inside = true;
      for (std::size_t c = 0; c < n.size(); ++c) {
        l[c] = n[c] + m[c];
        if (std::abs(l[c]) > op.L) inside = false;
      }
      if (!inside) continue;
      const cplx* r = M.row(j);
      cplx v = 0.0;
      for (int k = -K; k <= K; ++k)
        if (r[k + K] != 0.0) v += r[k + K] * wpow[k + K];
      op.H(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(box.index(l))) += v;
    }
  }
}

bool kernel_self_adjoint(const FourierKernel& M) {
  double scale = 0.0;
  for (std::size_t i = 0; i < M.box().size(); ++i)
    for (std::size_t k = 0; k < M.row_length(); ++k) scale = std::max(scale, std::abs(M.row(i)[k]));
  return max_coeff_diff(involution(M), M) <= 1e-12 * std::max(scale, 1e-300);
}

void assert_hermitian(LatticeOperator& op) {
  const double scale = std::max(op.H.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (op.H - op.H.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    throw Error(ErrorKind::domain, "self-adjoint inputs produced a non-Hermitian matrix (" + std::to_string(asym) + ")");
  op.hermitian = true;
}

template <class T>
void put(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host expected");
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorKind::io, "truncated matrix stream");
  return v;
}

}  // namespace

LatticeOperator represent(const FourierKernel& M, cplx z, int L) {
  if (L < 0) throw Error(ErrorKind::domain, "box radius must be nonnegative");
  if (std::abs(z.imag()) > M.strip()) throw Error(ErrorKind::phase_excluded, "phase outside the kernel strip");
  LatticeOperator op;
  op.config = M.config();
  op.L = L;
  op.z = z;
  op.box = SiteBox(op.config.d, L);
  const auto N = static_cast<Eigen::Index>(op.box.size());
  op.H = Eigen::MatrixXcd::Zero(N, N);
  fill_kernel(op, M);
  if (z.imag() == 0.0 && kernel_self_adjoint(M)) assert_hermitian(op);
  return op;
}

LatticeOperator represent(const FourierKernel& M, const PerturbedPotential& V, cplx z, int L) {
  if (L < 0) throw Error(ErrorKind::domain, "box radius must be nonnegative");
  PhaseSet phases(V, M.config(), L, std::min(V.strip(), M.strip()));
  if (!phases.admissible(z))
    throw Error(ErrorKind::phase_excluded, "phase z = (" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) +
                                               ") not admissible, pole margin " + std::to_string(phases.margin(z)));
  LatticeOperator op;
  op.config = M.config();
  op.L = L;
  op.z = z;
  op.box = SiteBox(op.config.d, L);
  const auto N = static_cast<Eigen::Index>(op.box.size());
  op.H = Eigen::MatrixXcd::Zero(N, N);
  fill_kernel(op, M);
  for (Eigen::Index a = 0; a < N; ++a) op.H(a, a) += V.eval(z - op.config.dot(op.box.site(static_cast<std::size_t>(a))));
  if (z.imag() == 0.0 && V.self_adjoint() && kernel_self_adjoint(M)) assert_hermitian(op);
  return op;
}

EigenPairs oracle_eigen(const LatticeOperator& op) {
  const double scale = std::max(op.H.cwiseAbs().maxCoeff(), 1e-300);
  if (!op.hermitian && (op.H - op.H.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorKind::domain, "oracle requires a Hermitian matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.H);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::domain, "eigensolver did not converge");
  EigenPairs e{es.eigenvalues(), es.eigenvectors(), 0.0};
  const double hn = std::max(e.values.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::MatrixXcd res = op.H * e.vectors - e.vectors * e.values.asDiagonal();
  e.max_residual = res.colwise().norm().maxCoeff() / hn;
  return e;
}

std::vector<std::size_t> eigen_peaks(const EigenPairs& eig) {
  std::vector<std::size_t> p(static_cast<std::size_t>(eig.vectors.cols()));
  for (Eigen::Index j = 0; j < eig.vectors.cols(); ++j) {
    Eigen::Index i;
    eig.vectors.col(j).cwiseAbs().maxCoeff(&i);
    p[static_cast<std::size_t>(j)] = static_cast<std::size_t>(i);
  }
  return p;
}

EigenMatch match_eigenvalues(const LatticeOperator& op, const EigenPairs& eig, const PerturbedPotential& V_hat,
                             int interior) {
  EigenMatch m;
  m.interior = interior;
  const std::vector<std::size_t> peaks = eigen_peaks(eig);
  // predictions and eigenpairs localized in the interior, both sorted by energy
  std::vector<std::pair<double, std::size_t>> pred, found;
  for (std::size_t a = 0; a < op.box.size(); ++a)
    if (max_norm(op.box.site(a)) <= interior) pred.push_back({V_hat.eval(op.z - op.config.dot(op.box.site(a))).real(), a});
  for (std::size_t j = 0; j < peaks.size(); ++j)
    if (max_norm(op.box.site(peaks[j])) <= interior) found.push_back({eig.values(static_cast<Eigen::Index>(j)), peaks[j]});
  std::sort(pred.begin(), pred.end());
  std::sort(found.begin(), found.end());
  const std::size_t n = std::min(pred.size(), found.size());
  m.peak_mismatches = static_cast<int>(std::max(pred.size(), found.size()) - n);
  if (pred.size() != found.size()) m.max_error = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double err = std::abs(found[i].first - pred[i].first);
    m.sites.push_back(op.box.site(pred[i].second));
    m.predicted.push_back(pred[i].first);
    m.matched.push_back(found[i].first);
    m.errors.push_back(err);
    m.max_error = std::max(m.max_error, err);
    if (found[i].second != pred[i].second) ++m.peak_mismatches;
  }
  return m;
}

EigenfunctionTable eigenfunctions(const FourierKernel& U_inv, cplx z, int L, double exponent, const LatticeOperator* H,
                                  const PerturbedPotential* V_hat) {
  EigenfunctionTable t;
  LatticeOperator T = represent(U_inv, z, L);
  t.box = T.box;
  t.phi = T.H;
  const LatticeConfig& cfg = U_inv.config();
  for (std::size_t j = 0; j < t.box.size(); ++j) {
    const Site n = t.box.site(j);
    for (std::size_t i = 0; i < t.box.size(); ++i) {
      const Site s = t.box.site(i);
      Site diff(n.size());
      for (std::size_t c = 0; c < n.size(); ++c) diff[c] = n[c] - s[c];
      const double env = 2.0 * std::pow(bracket(diff), -exponent);
      t.decay_ratio = std::max(t.decay_ratio, std::abs(t.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) / env);
    }
  }
  if (H && V_hat) {
    const int inner = L / 2;
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < t.box.size(); ++i)
      if (max_norm(t.box.site(i)) <= inner) rows.push_back(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < t.box.size(); ++j) {
      const Site n = t.box.site(j);
      if (max_norm(n) > inner) continue;
      const cplx lam = V_hat->eval(z - cfg.dot(n));
      Eigen::VectorXcd r = H->H * t.phi.col(static_cast<Eigen::Index>(j)) - lam * t.phi.col(static_cast<Eigen::Index>(j));
      double num = 0.0;
      for (Eigen::Index i : rows) num += std::norm(r(i));
      t.residual = std::max(t.residual, std::sqrt(num) / t.phi.col(static_cast<Eigen::Index>(j)).norm());
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> gs(t.phi.adjoint() * t.phi, Eigen::EigenvaluesOnly);
  t.gram_min = gs.eigenvalues().minCoeff();
  return t;
}

double Y_squared(double s, int d) {
  if (!(2 * s > d)) throw Error(ErrorKind::regularity, "sum of <n>^{-2s} diverges for s <= d/2");
  const int T = 100000;
  double sum = 1.0;
  for (int t = T; t >= 1; --t) {
    const double shell = std::pow(2.0 * t + 1, d) - std::pow(2.0 * t - 1, d);
    sum += shell * std::pow(t, -2.0 * s);
  }
  // shells beyond T hold at most 2d 3^{d-1} t^{d-1} sites
  sum += 2.0 * d * std::pow(3.0, d - 1) * std::pow(T, d - 2.0 * s) / (2.0 * s - d);
  return sum;
}

double X_constant(double s, double q, int d) {
  if (!(s > q + 0.5 * d)) throw Error(ErrorKind::regularity, "X(s,q) requires s > q + d/2");
  return std::sqrt(tame_constant(2 * q) * (Y_squared(s, d) + Y_squared(s - q, d)));
}

double weighted_operator_norm(const Eigen::MatrixXcd& T, const SiteBox& box, double q) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(box.size()));
  for (std::size_t i = 0; i < box.size(); ++i) w(static_cast<Eigen::Index>(i)) = std::pow(bracket(box.site(i)), q);
  Eigen::MatrixXcd A = w.asDiagonal() * T * w.cwiseInverse().asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(A);
  return svd.singularValues()(0);
}

double weighted_norm(const Eigen::VectorXcd& psi, const SiteBox& box, double q) {
  double s = 0.0;
  for (std::size_t i = 0; i < box.size(); ++i)
    s += std::norm(psi(static_cast<Eigen::Index>(i))) * std::pow(bracket(box.site(i)), 2 * q);
  return std::sqrt(s);
}

std::vector<double> log_time_grid(int points, double t_min, double t_max) {
  if (points < 2 || !(t_min > 0) || !(t_max > t_min)) throw Error(ErrorKind::domain, "invalid time grid");
  std::vector<double> t{0.0};
  const double a = std::log10(t_min), b = std::log10(t_max);
  for (int i = 0; i < points - 1; ++i) t.push_back(std::pow(10.0, a + (b - a) * i / (points - 2)));
  return t;
}

EvolveReport evolve(const FourierKernel& U, const FourierKernel& U_inv, const PerturbedPotential& V_hat, double x,
                    const Eigen::VectorXcd& psi, int L, const std::vector<double>& t_grid,
                    const std::vector<double>& qs, double regularity) {
  const int d = U.config().d;
  for (double q : qs)
    if (!(regularity > q + 0.5 * d))
      throw Error(ErrorKind::regularity, "q = " + std::to_string(q) + " needs s - tau - 7 delta > q + d/2");
  LatticeOperator TU = represent(U, x, L);
  LatticeOperator TUi = represent(U_inv, x, L);
  if (psi.size() != static_cast<Eigen::Index>(TU.box.size())) throw Error(ErrorKind::domain, "state size differs from the box");
  const auto N = static_cast<Eigen::Index>(TU.box.size());
  Eigen::VectorXd mu(N);
  for (Eigen::Index a = 0; a < N; ++a) mu(a) = V_hat.eval(x - U.config().dot(TU.box.site(static_cast<std::size_t>(a)))).real();

  EvolveReport rep;
  rep.times = t_grid;
  rep.qs = qs;
  rep.ratios.assign(qs.size(), {});
  std::vector<double> psi_q;
  for (double q : qs) psi_q.push_back(weighted_norm(psi, TU.box, q));
  const Eigen::VectorXcd phi = TU.H * psi;
  Eigen::VectorXcd tmp(N);
  for (double t : t_grid) {
    for (Eigen::Index a = 0; a < N; ++a) tmp(a) = std::polar(1.0, -t * mu(a)) * phi(a);
    const Eigen::VectorXcd out = TUi.H * tmp;
    for (std::size_t i = 0; i < qs.size(); ++i) rep.ratios[i].push_back(weighted_norm(out, TU.box, qs[i]) / psi_q[i]);
  }
  const double half = 0.5 * std::min(U.strip(), U_inv.strip());
  const double un = std::max(norm(U, half, regularity).value, norm(U_inv, half, regularity).value);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const std::vector<double>& r = rep.ratios[i];
    rep.sup.push_back(*std::max_element(r.begin(), r.end()));
    rep.ceiling.push_back(std::pow(X_constant(regularity, qs[i], d), 4) * std::pow(un, 4));
    // least-squares slope of the running maximum against log10 t over t > 0
    double run = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int cnt = 0;
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
      run = std::max(run, r[j]);
      if (t_grid[j] <= 0.0) continue;
      const double lx = std::log10(t_grid[j]);
      sx += lx;
      sy += run;
      sxx += lx * lx;
      sxy += lx * run;
      ++cnt;
    }
    const double den = cnt * sxx - sx * sx;
    rep.slope.push_back(den > 0.0 ? (cnt * sxy - sx * sy) / den : 0.0);
  }
  return rep;
}

double ids(const PerturbedPotential& V_hat, double E) {
  const Branch b = real_branch(V_hat);
  if (E == std::numeric_limits<double>::infinity()) return 1.0;
  if (E == -std::numeric_limits<double>::infinity()) return 0.0;
  const double th = invert_on_branch(V_hat, E);
  return b.increasing ? th - b.left : b.right - th;
}

double ids_finite(const EigenPairs& eig, double E) {
  const Eigen::Index N = eig.values.size();
  const double* v = eig.values.data();
  return static_cast<double>(std::upper_bound(v, v + N, E) - v) / static_cast<double>(N);
}

double ids_finite(const FourierKernel& M, const PerturbedPotential& V, double x, int L, double E) {
  return ids_finite(oracle_eigen(represent(M, V, x, L)), E);
}

void write_matrix(std::ostream& out, const LatticeOperator& op) {
  out.write("QPOPMAT1", 8);
  put<std::int32_t>(out, op.config.d);
  put<std::int32_t>(out, op.L);
  put<std::int32_t>(out, static_cast<std::int32_t>(op.H.rows()));
  put<std::int32_t>(out, static_cast<std::int32_t>(op.H.cols()));
  for (Eigen::Index i = 0; i < op.H.rows(); ++i)
    for (Eigen::Index j = 0; j < op.H.cols(); ++j) {
      put<double>(out, op.H(i, j).real());
      put<double>(out, op.H(i, j).imag());
    }
}

LatticeOperator read_matrix(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "QPOPMAT1", 8) != 0) throw Error(ErrorKind::parse, "bad matrix header");
  LatticeOperator op;
  op.config.d = get<std::int32_t>(in);
  op.config.omega.assign(static_cast<std::size_t>(std::max(op.config.d, 1)), 0.0);
  op.L = get<std::int32_t>(in);
  const auto rows = get<std::int32_t>(in), cols = get<std::int32_t>(in);
  op.box = SiteBox(op.config.d, op.L);
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows) != op.box.size() || rows != cols)
    throw Error(ErrorKind::parse, "matrix dimensions inconsistent with the box");
  op.H.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      double re = get<double>(in), im = get<double>(in);
      op.H(i, j) = cplx(re, im);
    }
  return op;
}

}  // namespace qpdiag
