#pragma once

#include <optional>
#include <string>
#include <vector>

namespace qpdiag {

enum class ScheduleMode { certified, adaptive };

const char* to_string(ScheduleMode mode);
ScheduleMode parse_schedule_mode(const std::string& text);

// An inequality lhs <= rhs between logarithms of positive quantities.
struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack() const { return rhs - lhs; }
  bool holds(double rel_tol = 1e-12) const;
};

struct ScheduleParams {
  double alpha0 = 0.1;
  double delta = 0.1;
  double tau = 1.5;
  double gamma = 0.1;
  double R = 0.25;
  double mono_lb = 1.0;
  int d = 1;
  ScheduleMode mode = ScheduleMode::adaptive;
};

struct ScheduleOverrides {
  std::optional<double> alpha;
  std::optional<double> Theta;        // adaptive only
  std::optional<double> theta0;       // adaptive only
  std::optional<double> contraction;  // adaptive only
  int steps = 50;                     // length of the per-step arrays
};

struct Schedule {
  double alpha0 = 0.0, alpha = 0.0, alpha1 = 0.0, delta = 0.0, tau = 0.0, gamma = 0.0, R = 0.0, mono_lb = 0.0;
  int d = 1;
  ScheduleMode mode = ScheduleMode::adaptive;

  // certified constants, always computed (log domain)
  double log_Theta_cert = 0.0;
  double log_eta0 = 0.0;
  double log_eps0 = 0.0;
  std::vector<InequalityCheck> checks;

  // constants driving the iteration
  double log_Theta = 0.0;
  double log_theta0 = 0.0;
  double contraction = 0.5;
  bool theta0_set = false;

  std::vector<double> log_theta;  // log θ_l
  std::vector<double> log_Q;      // log Q_l
  std::vector<double> radius;     // R_l

  double Theta() const;
  double theta(int l) const;
  double Q(int l) const;
  double R_at(int l) const { return radius.at(static_cast<std::size_t>(l)); }
  int steps() const { return static_cast<int>(radius.size()) - 1; }
};

Schedule make_schedule(const ScheduleParams& params, const ScheduleOverrides& overrides = {});

// θ0 from the coupling θ0^{-δ} = Ñ^{δ/(α-α0)}, clamped to [lo, hi]
double coupled_theta0(double kernel_norm, double alpha, double alpha0, double lo = 4.0, double hi = 256.0);

// fill the per-step arrays once θ0 is known
void set_theta0(Schedule& schedule, double theta0);

// the certified inequalities re-evaluated from the emitted constants
std::vector<InequalityCheck> certified_checks(const Schedule& schedule);

}  // namespace qpdiag
