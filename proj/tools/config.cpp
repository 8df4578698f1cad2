#include "config.hpp"

#include <fstream>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qpdiag/errors.hpp"

namespace qpdiag::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"lattice", {"d", "omega", "tau", "N_check"}},
    {"potential", {"base", "R"}},
    {"hopping", {"kind", "eps", "decay", "range", "kick", "kick_alpha", "kick_amplitude", "quad_points", "fit_min",
                 "fit_max"}},
    {"schedule", {"mode", "alpha0", "delta", "s", "alpha", "Theta", "theta0", "contraction", "gamma", "max_steps", "tol"}},
    {"experiments", {"phases", "box", "study_boxes", "eigen", "decay", "evolve", "ids", "time_points", "t_min",
                     "t_max", "q", "energies", "lipschitz_pairs", "match_tol", "slope_tol", "seed"}},
    {"output", {"dir"}},
};

// line numbers of "section.key" entries, for diagnostics only
std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string line, section;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == ';' || line[b] == '#') continue;
    if (line[b] == '[') {
      section = line.substr(b + 1, line.find(']') - b - 1);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(b, eq - b);
    key.erase(key.find_last_not_of(" \t") + 1);
    lines[section + "." + key] = no;
  }
  return lines;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::map<std::string, int> lines, std::string origin)
      : tree_(tree), lines_(std::move(lines)), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    auto it = lines_.find(path);
    const std::string where = origin_ + (it != lines_.end() ? ":" + std::to_string(it->second) : "");
    const auto dot = path.find('.');
    throw Error(ErrorKind::config, where + ": [" + path.substr(0, dot) + "] " + path.substr(dot + 1) + ": " + what);
  }

  std::optional<std::string> raw(const std::string& path) const {
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(path, '.'));
    if (!v) return std::nullopt;
    std::string s = *v;
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t") + 1);
    return s;
  }

  void number(const std::string& path, double& out) const {
    if (auto v = raw(path)) out = to_double(path, *v);
  }
  void number(const std::string& path, std::optional<double>& out) const {
    if (auto v = raw(path)) out = to_double(path, *v);
  }
  void integer(const std::string& path, int& out) const {
    if (auto v = raw(path)) {
      std::size_t pos = 0;
      long long x = 0;
      try {
        x = std::stoll(*v, &pos);
      } catch (...) {
        fail(path, "expected an integer, got '" + *v + "'");
      }
      if (pos != v->size() || x < -(1LL << 31) || x >= (1LL << 31)) fail(path, "expected an integer, got '" + *v + "'");
      out = static_cast<int>(x);
    }
  }
  void flag(const std::string& path, bool& out) const {
    if (auto v = raw(path)) {
      if (*v == "true" || *v == "on" || *v == "1") out = true;
      else if (*v == "false" || *v == "off" || *v == "0") out = false;
      else fail(path, "expected true/false, got '" + *v + "'");
    }
  }
  void list(const std::string& path, std::vector<double>& out) const {
    if (auto v = raw(path)) {
      try {
        out = parse_list(*v);
      } catch (const Error&) {
        fail(path, "expected a comma-separated list of numbers, got '" + *v + "'");
      }
    }
  }

  double to_double(const std::string& path, const std::string& v) const {
    std::size_t pos = 0;
    double x = 0.0;
    try {
      x = std::stod(v, &pos);
    } catch (...) {
      fail(path, "expected a number, got '" + v + "'");
    }
    if (pos != v.size()) fail(path, "expected a number, got '" + v + "'");
    return x;
  }

 private:
  const pt::ptree& tree_;
  std::map<std::string, int> lines_;
  std::string origin_;
};

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (text.find_first_not_of(" \t") == std::string::npos) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) throw Error(ErrorKind::config, "empty list entry");
    std::size_t pos = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &pos);
    } catch (...) {
      throw Error(ErrorKind::config, "bad list entry '" + item + "'");
    }
    if (pos != item.size()) throw Error(ErrorKind::config, "bad list entry '" + item + "'");
    out.push_back(x);
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::parse, origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  Reader r(tree, key_lines(text), origin);

  for (const auto& [section, body] : tree) {
    auto known = kKnownKeys.find(section);
    if (known == kKnownKeys.end()) {
      if (body.empty()) throw Error(ErrorKind::config, origin + ": key '" + section + "' outside any section");
      throw Error(ErrorKind::config, origin + ": unknown section [" + section + "]");
    }
    for (const auto& kv : body)
      if (!known->second.count(kv.first)) r.fail(section + "." + kv.first, "unknown key");
  }

  ExperimentConfig c;
  r.integer("lattice.d", c.lattice.d);
  if (auto w = r.raw("lattice.omega")) {
    if (*w == "golden") {
      c.lattice.omega = golden_mean_lattice().omega;
    } else {
      r.list("lattice.omega", c.lattice.omega);
    }
  } else if (c.lattice.d != 1) {
    r.fail("lattice.omega", "required when d != 1");
  }
  r.number("lattice.tau", c.tau);
  r.integer("lattice.N_check", c.N_check);

  if (auto b = r.raw("potential.base")) c.base = *b;
  r.number("potential.R", c.R);

  if (auto k = r.raw("hopping.kind")) {
    if (*k == "power") c.hopping = HoppingKind::power;
    else if (*k == "kick") c.hopping = HoppingKind::kick;
    else if (*k == "laplacian") c.hopping = HoppingKind::laplacian;
    else r.fail("hopping.kind", "expected power, kick or laplacian, got '" + *k + "'");
  }
  r.number("hopping.eps", c.eps);
  r.number("hopping.decay", c.decay);
  r.integer("hopping.range", c.range);
  if (auto k = r.raw("hopping.kick")) {
    try {
      c.kick.kind = parse_kick_kind(*k);
    } catch (const Error&) {
      r.fail("hopping.kick", "expected zero, cosine or singular, got '" + *k + "'");
    }
  }
  std::optional<double> amp;
  r.number("hopping.kick_alpha", c.kick.alpha);
  r.number("hopping.kick_amplitude", amp);
  if (c.kick.kind == KickKind::singular) c.kick = amp ? KickPotential::singular(c.kick.alpha, *amp) : KickPotential::singular(c.kick.alpha);
  if (c.kick.kind == KickKind::cosine) c.kick.amplitude = amp.value_or(0.25);
  r.integer("hopping.quad_points", c.quad.quad_points);
  r.integer("hopping.fit_min", c.quad.fit_min);
  r.integer("hopping.fit_max", c.quad.fit_max);

  if (auto m = r.raw("schedule.mode")) {
    try {
      c.mode = parse_schedule_mode(*m);
    } catch (const Error&) {
      r.fail("schedule.mode", "expected certified or adaptive, got '" + *m + "'");
    }
  }
  r.number("schedule.alpha0", c.alpha0);
  r.number("schedule.delta", c.delta);
  r.number("schedule.s", c.s);
  r.number("schedule.alpha", c.alpha);
  r.number("schedule.Theta", c.Theta);
  r.number("schedule.theta0", c.theta0);
  r.number("schedule.contraction", c.contraction);
  r.number("schedule.gamma", c.gamma);
  r.integer("schedule.max_steps", c.max_steps);
  r.number("schedule.tol", c.tol);

  r.list("experiments.phases", c.phases);
  r.integer("experiments.box", c.box);
  if (r.raw("experiments.study_boxes")) {
    std::vector<double> b;
    r.list("experiments.study_boxes", b);
    c.study_boxes.clear();
    for (double x : b) {
      if (x != std::floor(x) || x < 1) r.fail("experiments.study_boxes", "box radii must be positive integers");
      c.study_boxes.push_back(static_cast<int>(x));
    }
  }
  r.flag("experiments.eigen", c.eigen);
  r.flag("experiments.decay", c.decay_check);
  r.flag("experiments.evolve", c.evolve);
  r.flag("experiments.ids", c.ids);
  r.integer("experiments.time_points", c.time_points);
  r.number("experiments.t_min", c.t_min);
  r.number("experiments.t_max", c.t_max);
  r.list("experiments.q", c.evolve_q);
  r.list("experiments.energies", c.energies);
  r.integer("experiments.lipschitz_pairs", c.lipschitz_pairs);
  r.number("experiments.match_tol", c.match_tol);
  r.number("experiments.slope_tol", c.slope_tol);
  if (auto v = r.raw("experiments.seed")) {
    try {
      std::size_t pos = 0;
      c.seed = std::stoull(*v, &pos);
      if (pos != v->size()) throw 0;
    } catch (...) {
      r.fail("experiments.seed", "expected a nonnegative integer, got '" + *v + "'");
    }
  }
  if (auto d = r.raw("output.dir")) c.out = *d;

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void ExperimentConfig::validate() const {
  lattice.validate();
  if (!(tau > lattice.d)) throw Error(ErrorKind::config, "[lattice] tau must exceed d");
  if (N_check < 1) throw Error(ErrorKind::config, "[lattice] N_check must be positive");
  if (base != "tangent") throw Error(ErrorKind::config, "[potential] base: hopping models use the tangent base");
  if (!(R > 0)) throw Error(ErrorKind::config, "[potential] R must be positive");
  if (lattice.d != 1) throw Error(ErrorKind::config, "[lattice] d: hopping models are one-dimensional");
  if (range < 1) throw Error(ErrorKind::config, "[hopping] range must be positive");
  if (box < 1) throw Error(ErrorKind::config, "[experiments] box must be positive");
  if (time_points < 2 || !(t_min > 0) || !(t_max > t_min)) throw Error(ErrorKind::config, "[experiments] invalid time grid");
  if (phases.empty()) throw Error(ErrorKind::config, "[experiments] phases must not be empty");
  if (max_steps < 1) throw Error(ErrorKind::config, "[schedule] max_steps must be positive");
}

ScheduleParams ExperimentConfig::schedule_params(double gamma_eff, double mono_lb) const {
  ScheduleParams p;
  p.alpha0 = alpha0;
  p.delta = delta;
  p.tau = tau;
  p.gamma = gamma.value_or(gamma_eff);
  p.R = R;
  p.mono_lb = mono_lb;
  p.d = lattice.d;
  p.mode = mode;
  return p;
}

ScheduleOverrides ExperimentConfig::schedule_overrides() const {
  ScheduleOverrides o;
  o.alpha = alpha.value_or(s - 3 * delta);
  o.Theta = Theta;
  o.theta0 = theta0;
  o.contraction = contraction;
  o.steps = std::max(50, max_steps + 1);
  return o;
}

}  // namespace qpdiag::cli
