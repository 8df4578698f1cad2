#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "pipeline.hpp"
#include "qpdiag/errors.hpp"

using namespace qpdiag;
using namespace qpdiag::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qpdiag_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "t.ini");
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

// small but complete experiment
ExperimentConfig quick(const fs::path& out, double eps) {
  ExperimentConfig c;
  c.eps = eps;
  c.range = 16;
  c.box = 24;
  c.study_boxes = {12, 24, 48};
  c.time_points = 200;
  c.lipschitz_pairs = 100;
  c.energies = {-2.5, -0.5, 0.5, 2.5};
  c.out = out.string();
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QPDIAG_CLI) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(
      "[lattice]\nomega = golden\ntau = 2\n\n[hopping]\nkind = kick\nkick = singular\nkick_alpha = 0.5\nrange = 32\n"
      "[schedule]\nmode = certified\nTheta = 4\n[experiments]\nphases = 0.1, 0.2\nevolve = off\nseed = 7\n"
      "[output]\ndir = res\n");
  CHECK(c.tau == 2.0);
  CHECK(c.hopping == HoppingKind::kick);
  CHECK(c.kick.kind == KickKind::singular);
  CHECK(c.kick.alpha == 0.5);
  CHECK(c.kick.amplitude == doctest::Approx(std::pow(2.0, -0.5)));
  CHECK(c.range == 32);
  CHECK(c.mode == ScheduleMode::certified);
  CHECK(c.Theta == 4.0);
  CHECK(c.phases == std::vector<double>{0.1, 0.2});
  CHECK_FALSE(c.evolve);
  CHECK(c.seed == 7);
  CHECK(c.out == "res");
  CHECK(parse_list(" 1, 2.5 ,-3") == std::vector<double>{1.0, 2.5, -3.0});
  CHECK_THROWS_AS(parse_list("1,,2"), Error);
  CHECK(parse_list("  ").empty());

  const ExperimentConfig d = parse_config("");
  CHECK(d.eps == 1e-2);
  CHECK(d.s == 4.5);
  CHECK(d.schedule_overrides().alpha == doctest::Approx(4.2));
}

TEST_CASE("config diagnostics name the line and field") {
  CHECK(error_of("[lattice]\ntau = 1.5\nN_check = ten\n").find("t.ini:3: [lattice] N_check") != std::string::npos);
  CHECK(error_of("[hopping]\n\nbogus = 1\n").find("t.ini:3: [hopping] bogus: unknown key") != std::string::npos);
  CHECK(error_of("[nowhere]\nx = 1\n").find("unknown section [nowhere]") != std::string::npos);
  CHECK(error_of("eps = 1\n").find("outside any section") != std::string::npos);
  CHECK(error_of("[experiments]\neigen = maybe\n").find("t.ini:2: [experiments] eigen") != std::string::npos);
  CHECK(error_of("[schedule]\nmode = fast\n").find("[schedule] mode") != std::string::npos);
  CHECK(error_of("[lattice\n").find("t.ini:1") != std::string::npos);

  ExperimentConfig bad;
  bad.tau = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/x.ini"), Error);
}

TEST_CASE("unperturbed run passes every check") {
  const fs::path out = scratch("eps0");
  Pipeline p(quick(out, 0.0));
  p.run();
  p.write_report();
  for (const Check& c : p.checks()) {
    INFO(c.name << " " << c.detail);
    if (c.gating) CHECK(c.ok);
  }
  CHECK(p.ok());
  for (const char* f : {"schedule.csv", "trace.csv", "diagonalize.json", "eigen_match.csv", "decay_profile.csv",
                        "spectrum.json", "ids.csv", "ids_lipschitz.csv", "ids.json", "evolve.csv", "evolve.json",
                        "report.json"})
    CHECK(fs::exists(out / f));

  // κ table against the closed form
  std::ifstream in(out / "ids.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "E,kappa,closed_form");
  int rows = 0;
  while (std::getline(in, line)) {
    double E, k;
    char comma;
    std::istringstream ls(line);
    ls >> E >> comma >> k;
    CHECK(std::abs(k - (0.5 + std::atan(E) / kPi)) < 1e-8);
    ++rows;
  }
  CHECK(rows == 2001);
}

TEST_CASE("perturbed run") {
  const fs::path out = scratch("eps2");
  Pipeline p(quick(out, 1e-2));
  p.run();
  CHECK(p.result().checks.converged);
  for (const Check& c : p.checks()) {
    INFO(c.name << " " << c.detail);
    if (c.gating) CHECK(c.ok);
  }
}

TEST_CASE("rational frequency fails at the Diophantine stage") {
  ExperimentConfig c = quick(scratch("rational"), 1e-2);
  c.lattice.omega = {0.5};
  Pipeline p(c);
  try {
    p.run();
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "diophantine_check");
    CHECK(std::string(e.what()).find("resonance") != std::string::npos);
  }
}

TEST_CASE("zero kick hopping table") {
  const fs::path out = scratch("rotor");
  ExperimentConfig c = quick(out, 1e-2);
  c.hopping = HoppingKind::kick;
  c.kick = KickPotential::zero();
  Pipeline p(c);
  p.rotor();
  CHECK(p.ok());
  std::ifstream in(out / "hopping.csv");
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.substr(line.find(',')) == ",0,0,0");
    ++rows;
  }
  CHECK(rows == 33);
}

TEST_CASE("identical config and seed give identical files") {
  const fs::path a = scratch("repro_a"), b = scratch("repro_b");
  for (const fs::path& out : {a, b}) {
    ExperimentConfig c = quick(out, 1e-2);
    c.evolve = false;
    c.seed = 5;
    Pipeline p(c);
    p.run();
  }
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    INFO(entry.path().filename().string());
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("binary");
  const fs::path good = dir / "good.ini", rational = dir / "rational.ini", broken = dir / "broken.ini";
  std::ofstream(good) << "[hopping]\neps = 0\nrange = 8\n[experiments]\nbox = 16\nlipschitz_pairs = 50\n";
  std::ofstream(rational) << "[lattice]\nomega = 0.25\n";
  std::ofstream(broken) << "[hopping]\neps = lots\n";
  const std::string o = " --out " + (dir / "out").string();
  CHECK(run_cli("--config " + good.string() + o + " ids") == 0);
  CHECK(run_cli("--config " + good.string() + o + " schedule") == 0);
  CHECK(fs::exists(dir / "out" / "ids.csv"));
  CHECK(run_cli("--config " + rational.string() + o + " diagonalize") == 2);
  CHECK(run_cli("--config " + broken.string() + o + " ids") == 2);
  CHECK(run_cli("--mode sometimes schedule") != 0);
  CHECK(run_cli("") != 0);
}
