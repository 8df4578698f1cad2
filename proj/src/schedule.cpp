#include "qpdiag/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpdiag/errors.hpp"
#include "qpdiag/lattice.hpp"

namespace qpdiag {

namespace {

constexpr double kGridStep = 0.086643397569993163;  // ln 2 / 8

// smallest grid point 2^{j/8} whose logarithm is >= x
double snap_up(double x) {
  if (!std::isfinite(x) || std::abs(x) / kGridStep > 9.0e15)
    throw Error(ErrorKind::schedule_overflow, "grid search leaves the representable range (log = " +
                                                  std::to_string(x) + ")");
  double j = std::ceil(x / kGridStep - 1e-12);
  double v = j * kGridStep;
  while (v < x) v = (++j) * kGridStep;
  return v;
}

// log(1 - e^{y}) for y < 0
double log1m_exp(double y) { return y > -0.693 ? std::log(-std::expm1(y)) : std::log1p(-std::exp(y)); }

struct Derived {
  double logK1;  // log K(α1)
  double K1;
  double p;      // (α0 - α)/2
};

Derived derive(const Schedule& s) {
  Derived d;
  d.K1 = tame_constant(s.alpha1);
  if (!std::isfinite(d.K1)) throw Error(ErrorKind::schedule_overflow, "K(alpha1) overflows");
  d.logK1 = std::max(0.0, s.alpha1 - 1.0) * std::log(2.0);
  d.p = 0.5 * (s.alpha0 - s.alpha);
  return d;
}

void fill_arrays(Schedule& s, int steps) {
  const double p = 0.5 * (s.alpha0 - s.alpha);
  const double lT = s.log_Theta;
  s.log_theta.assign(steps + 1, 0.0);
  s.log_Q.assign(steps + 1, 0.0);
  s.radius.assign(steps + 1, s.R);
  const double cap = std::log(0.5 * s.R) + log1m_exp(p * lT);
  for (int l = 0; l <= steps; ++l) {
    s.log_theta[l] = s.log_theta0 + l * lT;
    double q = std::log(4.0 / s.mono_lb) + p * s.log_theta[l];
    // adaptive radii keep sum Q_l <= R/2 for any θ0
    if (s.mode == ScheduleMode::adaptive) q = std::min(q, cap + l * p * lT);
    s.log_Q[l] = q;
    if (l > 0) s.radius[l] = s.radius[l - 1] - std::exp(s.log_Q[l - 1]);
  }
}

}  // namespace

const char* to_string(ScheduleMode mode) { return mode == ScheduleMode::certified ? "certified" : "adaptive"; }

ScheduleMode parse_schedule_mode(const std::string& text) {
  if (text == "certified") return ScheduleMode::certified;
  if (text == "adaptive") return ScheduleMode::adaptive;
  throw Error(ErrorKind::config, "unknown schedule mode '" + text + "'");
}

bool InequalityCheck::holds(double rel_tol) const {
  return lhs <= rhs + rel_tol * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

double Schedule::Theta() const { return std::exp(log_Theta); }
double Schedule::theta(int l) const { return std::exp(log_theta.at(static_cast<std::size_t>(l))); }
double Schedule::Q(int l) const { return std::exp(log_Q.at(static_cast<std::size_t>(l))); }

std::vector<InequalityCheck> certified_checks(const Schedule& s) {
  const Derived dv = derive(s);
  const double lT = s.log_Theta_cert, L = s.log_eta0, p = dv.p;
  const double l1m = log1m_exp(p * lT);
  const double ln4 = std::log(4.0);
  std::vector<InequalityCheck> c;
  c.push_back({"alpha_gap", s.alpha0 + s.tau + 4 * s.delta, s.alpha});
  c.push_back({"alpha1_gap", 2 * s.alpha + s.delta, s.alpha1});
  c.push_back({"Theta_delta", -s.delta * lT, -ln4 - 2 * dv.K1});
  c.push_back({"tame_factor", -ln4 - 2 * dv.K1, -ln4});
  c.push_back({"Theta_alpha0", -s.alpha0 * lT, -ln4});
  c.push_back({"radius_sum", p * L, std::log(s.R * s.mono_lb / 8.0) + l1m});
  c.push_back({"radius_unit", p * L, l1m});
  c.push_back({"divisor_growth", -s.delta * L, std::log(s.gamma * s.mono_lb / 4.0) - s.tau * lT});
  c.push_back({"quadratic_gain", -s.delta * L, -std::log(32.0) - dv.logK1 - 2 * dv.K1 + (s.alpha0 - s.alpha) * lT});
  c.push_back({"eta_above_Theta", -L, -lT});
  c.push_back({"eta_tail", (s.alpha0 - s.alpha) * L, (s.alpha0 - s.alpha - 3 * s.delta) * lT});
  c.push_back({"product_factor", -s.delta * L, -std::log(12.0) - 2 * dv.logK1});
  c.push_back({"eps0_eta", s.log_eps0, (s.alpha0 - s.alpha) * L});
  c.push_back({"eps0_unit", (s.alpha0 - s.alpha) * L, 0.0});
  // radii of the certified run stay above R/2
  double Rl = s.R, Rmin = s.R;
  for (int l = 0; l <= 50; ++l) {
    double q = std::log(4.0 / s.mono_lb) + p * (L + l * lT);
    Rl -= std::exp(q);
    Rmin = std::min(Rmin, Rl);
  }
  c.push_back({"radius_floor", std::log(0.5 * s.R), Rmin > 0 ? std::log(Rmin) : -std::numeric_limits<double>::infinity()});
  return c;
}

Schedule make_schedule(const ScheduleParams& in, const ScheduleOverrides& ov) {
  if (!(in.alpha0 > 0 && in.delta > 0 && in.tau > 0 && in.gamma > 0 && in.R > 0 && in.mono_lb > 0))
    throw Error(ErrorKind::schedule, "schedule inputs must be positive");
  if (in.d < 1) throw Error(ErrorKind::schedule, "dimension must be positive");
  if (!(in.tau > in.d)) throw Error(ErrorKind::schedule, "tau must exceed d");

  Schedule s;
  s.alpha0 = in.alpha0;
  s.delta = in.delta;
  s.tau = in.tau;
  s.gamma = in.gamma;
  s.R = in.R;
  s.mono_lb = in.mono_lb;
  s.d = in.d;
  s.mode = in.mode;
  s.alpha = ov.alpha.value_or(in.alpha0 + in.tau + 5 * in.delta);
  if (!(s.alpha > s.alpha0 + s.tau + 4 * s.delta)) throw Error(ErrorKind::schedule, "alpha must exceed alpha0 + tau + 4 delta");
  s.alpha1 = 2 * s.alpha + 2 * s.delta;

  const Derived dv = derive(s);
  const double ln4 = std::log(4.0);
  s.log_Theta_cert = snap_up(std::max((ln4 + 2 * dv.K1) / s.delta, ln4 / s.alpha0));

  const double lT = s.log_Theta_cert, p = dv.p;
  const double l1m = log1m_exp(p * lT);
  double L = 0.0;
  L = std::max(L, (std::log(s.R * s.mono_lb / 8.0) + l1m) / p);
  L = std::max(L, l1m / p);
  L = std::max(L, (s.tau * lT - std::log(s.gamma * s.mono_lb / 4.0)) / s.delta);
  L = std::max(L, (std::log(32.0) + dv.logK1 + 2 * dv.K1 + (s.alpha - s.alpha0) * lT) / s.delta);
  L = std::max(L, lT);
  L = std::max(L, (1.0 + 3 * s.delta / (s.alpha - s.alpha0)) * lT);
  L = std::max(L, (std::log(12.0) + 2 * dv.logK1) / s.delta);
  s.log_eta0 = snap_up(L);
  s.log_eps0 = (s.alpha0 - s.alpha) * s.log_eta0;
  s.checks = certified_checks(s);

  const int steps = std::max(1, ov.steps);
  if (s.mode == ScheduleMode::certified) {
    s.log_Theta = s.log_Theta_cert;
    s.log_theta0 = s.log_eta0;
    s.theta0_set = true;
    fill_arrays(s, steps);
  } else {
    const double Theta = ov.Theta.value_or(2.0);
    if (!(Theta > 1.0)) throw Error(ErrorKind::schedule, "Theta must exceed 1");
    s.log_Theta = std::log(Theta);
    s.contraction = ov.contraction.value_or(0.5);
    if (!(s.contraction > 0.0 && s.contraction < 1.0)) throw Error(ErrorKind::schedule, "contraction target must lie in (0,1)");
    s.radius.assign(steps + 1, s.R);
    if (ov.theta0) set_theta0(s, *ov.theta0);
  }
  return s;
}

double coupled_theta0(double kernel_norm, double alpha, double alpha0, double lo, double hi) {
  if (!(kernel_norm > 0.0)) return lo;
  return std::clamp(std::pow(kernel_norm, -1.0 / (alpha - alpha0)), lo, hi);
}

void set_theta0(Schedule& s, double theta0) {
  if (!(theta0 >= 1.0)) throw Error(ErrorKind::schedule, "theta0 must be at least 1");
  s.log_theta0 = std::log(theta0);
  s.theta0_set = true;
  fill_arrays(s, static_cast<int>(s.radius.size()) - 1);
}

}  // namespace qpdiag
