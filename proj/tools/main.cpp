#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "pipeline.hpp"
#include "qpdiag/errors.hpp"

using namespace qpdiag;

int main(int argc, char** argv) {
  CLI::App app{"quasi-periodic operator diagonalization experiments"};
  app.require_subcommand(1);

  std::string config_path, out, mode;
  std::vector<double> phases;
  std::optional<int> box;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "experiment config (INI)");
  app.add_option("--out", out, "output directory");
  app.add_option("--mode", mode, "schedule mode")->check(CLI::IsMember({"certified", "adaptive"}));
  app.add_option("--phase", phases, "phase x (repeatable)");
  app.add_option("--box", box, "box half-width L");
  app.add_option("--seed", seed, "sampling seed");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"schedule", "certified constants and inequality slacks"},
      {"diagonalize", "run the iteration and write the contraction trace"},
      {"spectrum", "oracle eigenvalue matching and eigenfunction decay"},
      {"ids", "integrated density of states"},
      {"evolve", "weighted norms of e^{-itH} psi over the time grid"},
      {"rotor-hopping", "hopping coefficients from a kick potential"},
      {"run", "every enabled stage"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  CLI11_PARSE(app, argc, argv);
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    cli::ExperimentConfig cfg = config_path.empty() ? cli::ExperimentConfig{} : cli::load_config(config_path);
    if (!out.empty()) cfg.out = out;
    if (!mode.empty()) cfg.mode = parse_schedule_mode(mode);
    if (!phases.empty()) cfg.phases = phases;
    if (box) cfg.box = *box;
    if (seed) cfg.seed = *seed;

    cli::Pipeline p(cfg);
    try {
      if (cmd == "schedule") p.schedule_table();
      else if (cmd == "diagonalize") p.diagonalize();
      else if (cmd == "spectrum") p.spectrum();
      else if (cmd == "ids") p.ids();
      else if (cmd == "evolve") p.evolve();
      else if (cmd == "rotor-hopping") p.rotor();
      else p.run();
    } catch (const cli::StageError& e) {
      p.write_report();
      std::cerr << "qpdiag: " << e.what() << '\n';
      return 2;
    }
    p.write_report();
    for (const cli::Check& c : p.checks())
      std::cout << (c.ok ? "ok    " : c.gating ? "FAIL  " : "note  ") << c.name << (c.detail.empty() ? "" : "  (" + c.detail + ")") << '\n';
    return p.ok() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "qpdiag: " << e.what() << '\n';
    return 2;
  }
}
