#pragma once

#include <complex>
#include <vector>

#include "qpdiag/kernel.hpp"
#include "qpdiag/lattice.hpp"

namespace qpdiag {

enum class BaseKind { tangent, cexp, rational };

// Base meromorphic function. The rational kind is P(w)/Q(w) with w = e^{2 pi i z},
// coefficient lists in increasing powers of w.
class BasePotential {
 public:
  static BasePotential tangent();
  static BasePotential cexp();
  static BasePotential rational(std::vector<cplx> numerator, std::vector<cplx> denominator);

  BaseKind kind() const { return kind_; }
  const std::vector<cplx>& numerator() const { return num_; }
  const std::vector<cplx>& denominator() const { return den_; }

  cplx eval(cplx z) const;
  cplx derivative(cplx z) const;
  // pole representatives with real part in [0,1)
  const std::vector<cplx>& poles() const { return poles_; }
  std::vector<double> real_poles() const;
  // distance from z to the nearest pole translate p + m, m integer
  double pole_distance(cplx z) const;

 private:
  BaseKind kind_ = BaseKind::tangent;
  std::vector<cplx> num_, den_;
  std::vector<cplx> poles_;
};

struct MonoGrid {
  int per_unit = 64;
};

class PerturbedPotential {
 public:
  PerturbedPotential() = default;
  // mono_lb and coef_mono_lb are estimated on construction unless supplied
  PerturbedPotential(BasePotential base, FourierSeries correction, double R, MonoGrid grid = {});
  PerturbedPotential(BasePotential base, FourierSeries correction, double R, double mono_lb, double coef_mono_lb);

  const BasePotential& base() const { return base_; }
  const FourierSeries& correction() const { return correction_; }
  double strip() const { return R_; }
  // lower bound for inf |V(z) - V(z-a)| / ||a|| over the strip
  double mono_lb() const { return mono_lb_; }
  // lower bound for inf_a 1 / (||a|| Ñ_R(1/(V - V(.-a)))), the coefficient-norm analogue
  double coef_mono_lb() const { return coef_mono_lb_; }

  cplx eval(cplx z) const;        // checked: strip and pole proximity
  cplx eval_raw(cplx z) const;    // unchecked
  cplx derivative_raw(cplx z) const;
  double pole_distance(cplx z) const { return base_.pole_distance(z); }

  double pole_epsilon() const { return pole_epsilon_; }
  void set_pole_epsilon(double eps) { pole_epsilon_ = eps; }

  bool self_adjoint(double tol = 1e-12) const;

 private:
  BasePotential base_;
  FourierSeries correction_;
  double R_ = 0.0;
  double mono_lb_ = 0.0;
  double coef_mono_lb_ = 0.0;
  double pole_epsilon_ = 1e-8;
};

double mono_constant(const PerturbedPotential& V, double R, MonoGrid grid = {});
double coef_mono_constant(const PerturbedPotential& V, double R, MonoGrid grid = {});

PerturbedPotential update_constant(const PerturbedPotential& V, const FourierSeries& m0, double Q);

// unique θ in the branch between consecutive real poles with V(θ) = E
double invert_on_branch(const PerturbedPotential& V, double E, double tol = 1e-13);

struct Branch {
  double left = -0.5;
  double right = 0.5;
  bool increasing = true;
};
Branch real_branch(const PerturbedPotential& V);
// throws not_monotone unless V is strictly monotone on a grid of the branch
void check_branch_monotone(const PerturbedPotential& V, int points = 4096);

// admissible phases: |Im z| <= R and every z - n·ω keeps away from the poles
class PhaseSet {
 public:
  PhaseSet(const PerturbedPotential& V, LatticeConfig config, int box_radius, double R);
  bool admissible(cplx z) const;
  // smallest pole distance of z - n·ω over the box
  double margin(cplx z) const;

 private:
  PerturbedPotential V_;
  LatticeConfig config_;
  int box_radius_;
  double R_;
};

}  // namespace qpdiag
