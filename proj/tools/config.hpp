#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpdiag/lattice.hpp"
#include "qpdiag/rotor.hpp"
#include "qpdiag/schedule.hpp"

namespace qpdiag::cli {

enum class HoppingKind { power, kick, laplacian };

struct ExperimentConfig {
  // [lattice]
  LatticeConfig lattice = golden_mean_lattice();
  double tau = 1.5;
  int N_check = 1024;

  // [potential]
  std::string base = "tangent";
  double R = 0.25;

  // [hopping]
  HoppingKind hopping = HoppingKind::power;
  double decay = 6.0;   // power law <n>^{-decay}
  int range = 64;
  KickPotential kick = KickPotential::zero();
  HoppingOptions quad{};
  double eps = 1e-2;

  // [schedule]
  ScheduleMode mode = ScheduleMode::adaptive;
  double alpha0 = 0.1;
  double delta = 0.1;
  double s = 4.5;       // kernel regularity; α = s - 3δ unless overridden
  std::optional<double> alpha, Theta, theta0, contraction;
  std::optional<double> gamma;  // default: the certified γ from the Diophantine check
  int max_steps = 12;
  double tol = 1e-12;

  // [experiments]
  std::vector<double> phases{0.1, 0.3, 0.77};
  int box = 64;
  std::vector<int> study_boxes{32, 64, 128};
  bool eigen = true;
  bool decay_check = true;
  bool evolve = true;
  bool ids = true;
  int time_points = 10000;
  double t_min = 1e-2;
  double t_max = 1e3;
  std::vector<double> evolve_q{0.0, 1.0};
  std::vector<double> energies;  // empty: -9.5, -8.5, ..., 9.5
  int lipschitz_pairs = 1000;
  double match_tol = 1e-6;
  double slope_tol = 1e-3;
  std::uint64_t seed = 1;

  std::string out = "out";

  ScheduleParams schedule_params(double gamma_eff, double mono_lb) const;
  ScheduleOverrides schedule_overrides() const;
  void validate() const;
};

// flat INI: [section] followed by key = value lines
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");

std::vector<double> parse_list(const std::string& text);

}  // namespace qpdiag::cli
