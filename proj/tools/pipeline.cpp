#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "qpdiag/errors.hpp"

namespace qpdiag::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_csv(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorKind::io, "cannot write " + p.string());
  out.imbue(std::locale::classic());
  out << std::setprecision(17);
  return out;
}

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string sci(double v) {
  std::ostringstream o;
  o.imbue(std::locale::classic());
  o << std::setprecision(4) << std::scientific << v;
  return o.str();
}

double regularity(const ExperimentConfig& c) { return c.s - c.tau - 7 * c.delta; }

}  // namespace

Pipeline::Pipeline(ExperimentConfig config) : cfg_(std::move(config)) {
  cfg_.validate();
  fs::create_directories(cfg_.out);
}

fs::path Pipeline::file(const std::string& name) const { return fs::path(cfg_.out) / name; }

void Pipeline::check(const std::string& name, bool ok, const std::string& detail, bool gating) {
  checks_.push_back({name, ok, detail, gating});
}

bool Pipeline::ok() const {
  return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.ok || !c.gating; });
}

template <class F>
void Pipeline::stage(const std::string& name, F&& body) {
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void Pipeline::lattice() {
  if (cert_) return;
  stage("diophantine_check", [&] { cert_ = diophantine_check(cfg_.lattice.omega, cfg_.tau, cfg_.N_check); });
  report_["diophantine"] = {{"gamma_eff", cert_->gamma_eff}, {"argmin", cert_->argmin}, {"N_check", cert_->N_check},
                            {"tau", cert_->tau}};
}

void Pipeline::model() {
  if (M_) return;
  lattice();
  stage("model", [&] {
    if (!hop_) {
      switch (cfg_.hopping) {
        case HoppingKind::power: hop_ = power_law_hopping(cfg_.range, cfg_.decay); break;
        case HoppingKind::kick: hop_ = hopping_from_kick(cfg_.kick, cfg_.range, cfg_.quad); break;
        case HoppingKind::laplacian: hop_ = laplacian_hopping(); break;
      }
    }
    auto [V, M] = assemble_model(*hop_, cfg_.eps, cfg_.lattice, cfg_.R, cfg_.s);
    int L = cfg_.box;
    for (int b : cfg_.study_boxes) L = std::max(L, b);
    PhaseSet phases(V, cfg_.lattice, L, cfg_.R);
    for (double x : cfg_.phases)
      if (!phases.admissible(x))
        throw Error(ErrorKind::phase_excluded, "phase " + std::to_string(x) + " has pole margin " +
                                                   std::to_string(phases.margin(x)) + " on the box");
    V_ = std::move(V);
    M_ = std::move(M);
  });
}

void Pipeline::schedule_table() {
  lattice();
  Schedule s;
  double mono = 0.0;
  stage("schedule", [&] {
    PerturbedPotential V(BasePotential::tangent(), FourierSeries(0), cfg_.R);
    mono = V.mono_lb();
    ScheduleParams p = cfg_.schedule_params(cert_->gamma_eff, mono);
    p.mode = ScheduleMode::certified;
    s = make_schedule(p, cfg_.schedule_overrides());
  });
  const double l10 = 1.0 / std::log(10.0);
  std::ofstream out = open_csv(file("schedule.csv"));
  out << "name,lhs,rhs,slack,holds\n";
  for (const InequalityCheck& c : s.checks)
    out << c.name << ',' << c.lhs << ',' << c.rhs << ',' << c.slack() << ',' << (c.holds() ? 1 : 0) << '\n';

  std::cout << std::setprecision(6);
  std::cout << "certified constants (log10)\n"
            << "  Theta  " << s.log_Theta_cert * l10 << "\n"
            << "  eta0   " << s.log_eta0 * l10 << "\n"
            << "  eps0   " << s.log_eps0 * l10 << "\n"
            << "inequalities (natural-log domain; alpha and alpha1 are linear)\n";
  for (const InequalityCheck& c : s.checks)
    std::cout << "  " << std::left << std::setw(16) << c.name << std::right << std::setw(16) << c.lhs << " <= "
              << std::setw(16) << c.rhs << "  slack " << std::setw(14) << c.slack() << (c.holds() ? "" : "  FAILS")
              << '\n';

  nlohmann::json j;
  j["alpha"] = s.alpha;
  j["alpha1"] = s.alpha1;
  j["gamma"] = s.gamma;
  j["mono_lb"] = mono;
  j["log10_Theta"] = s.log_Theta_cert * l10;
  j["log10_eta0"] = s.log_eta0 * l10;
  j["log10_eps0"] = s.log_eps0 * l10;
  bool all = true;
  for (const InequalityCheck& c : s.checks) all = all && c.holds();
  report_["schedule"] = j;
  check("schedule.inequalities", all, std::to_string(s.checks.size()) + " inequalities");
}

void Pipeline::diagonalize() {
  if (result_) return;
  model();
  stage("diagonalize", [&] {
    Schedule s = make_schedule(cfg_.schedule_params(cert_->gamma_eff, V_->mono_lb()), cfg_.schedule_overrides());
    DiagonalizeOptions opt;
    opt.tol = cfg_.tol;
    opt.max_steps = cfg_.max_steps;
    opt.N_check = cfg_.N_check;
    result_ = qpdiag::diagonalize(*V_, *M_, s, opt);
  });
  std::ofstream out = open_csv(file("trace.csv"));
  write_trace_csv(out, result_->trace);
  const nlohmann::json j = nlohmann::json::parse(summary_json(*result_));
  std::ofstream(file("diagonalize.json")) << j.dump(2) << '\n';
  report_["diagonalize"] = j;
  const FinalChecks& c = result_->checks;
  check("diagonalize.converged", c.converged, "offdiag " + sci(c.offdiag));
  check("diagonalize.K1", c.K1_ok, "");
  check("diagonalize.K2", c.K2_ok, "");
  check("diagonalize.mono", c.vr2_ok, "mono_hat " + sci(c.mono_hat));
  check("diagonalize.targets", c.targets_ok, "");
}

const DiagonalizeResult& Pipeline::result() {
  diagonalize();
  return *result_;
}

void Pipeline::spectrum() {
  diagonalize();
  const DiagonalizeResult& r = *result_;
  const double expo = regularity(cfg_);
  std::ofstream study = open_csv(file("eigen_study.csv"));
  std::ofstream match = open_csv(file("eigen_match.csv"));
  std::ofstream decay = open_csv(file("decay_profile.csv"));
  study << "x,L,interior,max_error,peak_mismatches,oracle_residual\n";
  match << "x,n,predicted,matched,error\n";
  decay << "x,i,abs_phi0,envelope\n";
  nlohmann::json js = nlohmann::json::array();

  double X = 0.0, gram_bound = -std::numeric_limits<double>::infinity();
  stage("spectrum", [&] {
    X = X_constant(expo, 0.0, cfg_.lattice.d);
    const double Mn = r.checks.M_norm;
    const double e = 3 * cfg_.delta / (cfg_.s - cfg_.alpha0 - 3 * cfg_.delta);
    const double g = r.checks.K1 * X * (Mn > 0 ? std::pow(Mn, e) : 0.0);
    gram_bound = 1.0 - g * g;
  });

  for (double x : cfg_.phases) {
    nlohmann::json jp;
    jp["x"] = x;
    std::vector<int> boxes = cfg_.study_boxes;
    if (std::find(boxes.begin(), boxes.end(), cfg_.box) == boxes.end()) boxes.push_back(cfg_.box);
    std::sort(boxes.begin(), boxes.end());
    bool study_ok = true;
    nlohmann::json jstudy = nlohmann::json::array();
    for (int L : boxes) {
      LatticeOperator H;
      EigenPairs eig;
      EigenMatch m;
      stage("spectrum", [&] {
        H = represent(*M_, *V_, x, L);
        eig = oracle_eigen(H);
        m = match_eigenvalues(H, eig, r.V_hat, L / 2);
      });
      study << x << ',' << L << ',' << L / 2 << ',' << m.max_error << ',' << m.peak_mismatches << ','
            << eig.max_residual << '\n';
      jstudy.push_back({{"L", L}, {"max_error", m.max_error}, {"peak_mismatches", m.peak_mismatches},
                        {"oracle_residual", eig.max_residual}});
      const bool ok = m.max_error <= cfg_.match_tol && m.peak_mismatches == 0;
      study_ok = study_ok && ok;
      check("spectrum.oracle_residual x=" + std::to_string(x) + " L=" + std::to_string(L), eig.max_residual <= 1e-10,
            sci(eig.max_residual));
      if (L != cfg_.box) continue;
      if (cfg_.eigen) {
        for (std::size_t i = 0; i < m.sites.size(); ++i)
          match << x << ',' << m.sites[i][0] << ',' << m.predicted[i] << ',' << m.matched[i] << ',' << m.errors[i] << '\n';
        check("spectrum.match x=" + std::to_string(x), ok,
              "max error " + sci(m.max_error) + ", peak mismatches " + std::to_string(m.peak_mismatches));
      }
      if (cfg_.decay_check) {
        EigenfunctionTable t;
        stage("eigenfunctions", [&] { t = eigenfunctions(r.U_inv, x, L, expo, &H, &r.V_hat); });
        const std::size_t c0 = t.box.index(Site(1, 0));
        for (std::size_t i = 0; i < t.box.size(); ++i) {
          const Site si = t.box.site(i);
          decay << x << ',' << si[0] << ',' << std::abs(t.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c0)))
                << ',' << 2.0 * std::pow(bracket(si), -expo) << '\n';
        }
        jp["decay_ratio"] = t.decay_ratio;
        jp["eigen_residual"] = t.residual;
        jp["gram_min"] = t.gram_min;
        jp["gram_bound"] = gram_bound;
        check("spectrum.decay x=" + std::to_string(x), t.decay_ratio <= 1.0, "ratio " + sci(t.decay_ratio));
        check("spectrum.gram x=" + std::to_string(x), t.gram_min >= gram_bound, "min " + sci(t.gram_min));
      }
    }
    jp["study"] = jstudy;
    if (cfg_.eigen) check("spectrum.study x=" + std::to_string(x), study_ok, "all study boxes within tolerance");
    js.push_back(jp);
  }
  nlohmann::json j;
  j["exponent"] = expo;
  j["X"] = X;
  j["match_tol"] = cfg_.match_tol;
  j["phases"] = js;
  std::ofstream(file("spectrum.json")) << j.dump(2) << '\n';
  report_["spectrum"] = j;
}

std::vector<double> Pipeline::energies() const {
  if (!cfg_.energies.empty()) return cfg_.energies;
  std::vector<double> e;
  for (int j = 0; j < 20; ++j) e.push_back(-9.5 + j);
  return e;
}

void Pipeline::ids() {
  diagonalize();
  const PerturbedPotential& Vh = result_->V_hat;
  const bool closed = cfg_.eps == 0.0;

  std::ofstream curve = open_csv(file("ids.csv"));
  curve << "E,kappa" << (closed ? ",closed_form" : "") << '\n';
  double prev = -1.0, closed_err = 0.0;
  bool monotone = true;
  stage("ids", [&] {
    for (int i = 0; i <= 2000; ++i) {
      const double E = -10.0 + 0.01 * i;
      const double k = qpdiag::ids(Vh, E);
      monotone = monotone && k >= prev;
      prev = k;
      curve << E << ',' << k;
      if (closed) {
        const double c = 0.5 + std::atan(E) / kPi;
        closed_err = std::max(closed_err, std::abs(k - c));
        curve << ',' << c;
      }
      curve << '\n';
    }
  });
  check("ids.monotone", monotone, "");
  if (closed) check("ids.closed_form", closed_err <= 1e-8, "max error " + sci(closed_err));

  // Lipschitz pairs: half at |ΔE| = 1e-3, half with gaps up to 10
  const double bound = 2.0 / result_->checks.mono_initial;
  std::mt19937_64 rng(cfg_.seed);
  std::ofstream lip = open_csv(file("ids_lipschitz.csv"));
  lip << "E1,E2,ratio\n";
  double worst = 0.0;
  stage("ids", [&] {
    for (int p = 0; p < cfg_.lipschitz_pairs; ++p) {
      const double E1 = -10.0 + 20.0 * uniform(rng);
      const double gap = p % 2 == 0 ? 1e-3 : 10.0 * (1.0 - uniform(rng));
      const double E2 = E1 + gap;
      const double ratio = std::abs(qpdiag::ids(Vh, E2) - qpdiag::ids(Vh, E1)) / gap;
      worst = std::max(worst, ratio);
      lip << E1 << ',' << E2 << ',' << ratio << '\n';
    }
  });
  check("ids.lipschitz", worst <= bound + 1e-6, "max ratio " + sci(worst) + ", bound " + sci(bound));

  // finite-volume counts at the first phase
  const double x = cfg_.phases.front();
  const std::vector<double> E = energies();
  std::vector<std::vector<double>> gaps(E.size());
  std::ofstream fin = open_csv(file("ids_finite.csv"));
  fin << "E,kappa";
  for (int L : cfg_.study_boxes) fin << ",finite_L" << L;
  fin << '\n';
  std::vector<std::vector<double>> vals(E.size());
  stage("ids_finite", [&] {
    for (int L : cfg_.study_boxes) {
      const EigenPairs eig = oracle_eigen(represent(*M_, *V_, x, L));
      for (std::size_t i = 0; i < E.size(); ++i) {
        const double f = ids_finite(eig, E[i]);
        vals[i].push_back(f);
        gaps[i].push_back(std::abs(f - qpdiag::ids(Vh, E[i])));
      }
    }
  });
  int decreasing = 0;
  nlohmann::json jt = nlohmann::json::array();
  for (std::size_t i = 0; i < E.size(); ++i) {
    fin << E[i] << ',' << qpdiag::ids(Vh, E[i]);
    for (double v : vals[i]) fin << ',' << v;
    fin << '\n';
    bool dec = true;
    for (std::size_t k = 1; k < gaps[i].size(); ++k) dec = dec && gaps[i][k] < gaps[i][k - 1];
    decreasing += dec ? 1 : 0;
    jt.push_back({{"E", E[i]}, {"gaps", gaps[i]}, {"decreasing", dec}});
  }
  check("ids.finite_trend", decreasing == static_cast<int>(E.size()),
        std::to_string(decreasing) + " of " + std::to_string(E.size()) + " energies strictly decreasing", false);

  nlohmann::json j;
  j["lipschitz_bound"] = bound;
  j["lipschitz_max"] = worst;
  j["monotone"] = monotone;
  if (closed) j["closed_form_error"] = closed_err;
  j["finite_x"] = x;
  j["finite"] = jt;
  std::ofstream(file("ids.json")) << j.dump(2) << '\n';
  report_["ids"] = j;
}

void Pipeline::evolve() {
  diagonalize();
  const DiagonalizeResult& r = *result_;
  const double x = cfg_.phases.front();
  const int L = cfg_.box;
  EvolveReport ev;
  stage("evolve", [&] {
    const SiteBox box(cfg_.lattice.d, L);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(box.size()));
    psi(static_cast<Eigen::Index>(box.index(Site(1, 0)))) = 1.0;
    ev = qpdiag::evolve(r.U, r.U_inv, r.V_hat, x, psi, L, log_time_grid(cfg_.time_points, cfg_.t_min, cfg_.t_max),
                        cfg_.evolve_q, regularity(cfg_));
  });
  std::ofstream out = open_csv(file("evolve.csv"));
  out << 't';
  for (double q : ev.qs) out << ",ratio_q" << q;
  out << '\n';
  for (std::size_t j = 0; j < ev.times.size(); ++j) {
    out << ev.times[j];
    for (const auto& rq : ev.ratios) out << ',' << rq[j];
    out << '\n';
  }
  nlohmann::json jq = nlohmann::json::array();
  for (std::size_t i = 0; i < ev.qs.size(); ++i) {
    const std::string q = std::to_string(ev.qs[i]);
    check("evolve.initial q=" + q, std::abs(ev.ratios[i].front() - 1.0) <= 1e-12, "");
    check("evolve.ceiling q=" + q, ev.sup[i] <= ev.ceiling[i],
          "sup " + sci(ev.sup[i]) + ", ceiling " + sci(ev.ceiling[i]));
    check("evolve.trend q=" + q, ev.slope[i] <= cfg_.slope_tol, "slope " + sci(ev.slope[i]));
    jq.push_back({{"q", ev.qs[i]}, {"sup", ev.sup[i]}, {"ceiling", ev.ceiling[i]},
                  {"ceiling_sharp", std::sqrt(ev.ceiling[i])}, {"slope", ev.slope[i]}});
  }
  nlohmann::json j;
  j["x"] = x;
  j["L"] = L;
  j["points"] = ev.times.size();
  j["q"] = jq;
  std::ofstream(file("evolve.json")) << j.dump(2) << '\n';
  report_["evolve"] = j;
}

void Pipeline::rotor() {
  stage("rotor", [&] {
    if (!hop_) {
      switch (cfg_.hopping) {
        case HoppingKind::power: hop_ = power_law_hopping(cfg_.range, cfg_.decay); break;
        case HoppingKind::kick: hop_ = hopping_from_kick(cfg_.kick, cfg_.range, cfg_.quad); break;
        case HoppingKind::laplacian: hop_ = laplacian_hopping(); break;
      }
    }
  });
  const HoppingSequence& h = *hop_;
  std::ofstream out = open_csv(file("hopping.csv"));
  write_hopping_csv(out, h);
  nlohmann::json j;
  j["N"] = h.N;
  j["quad_points"] = h.quad_points;
  j["max_err"] = h.max_err;
  j["slope"] = h.slope;
  j["fit_range"] = {h.fit_range.first, h.fit_range.second};
  j["exp_rate"] = h.exp_rate;
  j["warnings"] = h.warnings;
  if (cfg_.hopping == HoppingKind::kick) {
    j["kick"] = {{"kind", to_string(cfg_.kick.kind)}, {"amplitude", cfg_.kick.amplitude}, {"alpha", cfg_.kick.alpha}};
    switch (cfg_.kick.kind) {
      case KickKind::zero: {
        bool zero = std::all_of(h.phi.begin(), h.phi.end(), [](cplx c) { return c == 0.0; });
        check("rotor.zero", zero, "");
        break;
      }
      case KickKind::singular: {
        const double target = -(1.0 + cfg_.kick.alpha);
        check("rotor.slope", std::abs(h.slope - target) <= 0.15,
              "slope " + sci(h.slope) + ", expected " + sci(target));
        break;
      }
      case KickKind::cosine: check("rotor.exponential", h.exp_rate > 0.0, "rate " + sci(h.exp_rate)); break;
    }
  }
  std::ofstream(file("hopping.json")) << j.dump(2) << '\n';
  report_["rotor"] = j;
}

void Pipeline::run() {
  if (cfg_.hopping == HoppingKind::kick) rotor();
  schedule_table();
  diagonalize();
  if (cfg_.eigen || cfg_.decay_check) spectrum();
  if (cfg_.ids) ids();
  if (cfg_.evolve) evolve();
}

void Pipeline::write_report() {
  nlohmann::json c = nlohmann::json::array();
  for (const Check& k : checks_) c.push_back({{"name", k.name}, {"ok", k.ok}, {"detail", k.detail}, {"gating", k.gating}});
  report_["checks"] = c;
  report_["ok"] = ok();
  std::ofstream(file("report.json")) << report_.dump(2) << '\n';
}

}  // namespace qpdiag::cli
