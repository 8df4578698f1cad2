#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "qpdiag/iteration.hpp"
#include "qpdiag/rotor.hpp"
#include "qpdiag/smalldiv.hpp"
#include "qpdiag/spectral.hpp"

namespace qpdiag::cli {

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error("stage " + stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct Check {
  std::string name;
  bool ok = false;
  std::string detail;
  bool gating = true;  // diagnostics are reported but do not set the exit status
};

class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig config);

  const ExperimentConfig& config() const { return cfg_; }

  void schedule_table();
  void diagonalize();
  void spectrum();
  void ids();
  void evolve();
  void rotor();
  // every enabled stage in order
  void run();

  // report.json with all checks and stage summaries
  void write_report();
  bool ok() const;
  const std::vector<Check>& checks() const { return checks_; }
  const nlohmann::json& report() const { return report_; }

  const DiagonalizeResult& result();

 private:
  template <class F>
  void stage(const std::string& name, F&& body);
  void lattice();
  void model();
  void check(const std::string& name, bool ok, const std::string& detail, bool gating = true);
  std::filesystem::path file(const std::string& name) const;
  std::vector<double> energies() const;

  ExperimentConfig cfg_;
  std::optional<DiophantineCert> cert_;
  std::optional<HoppingSequence> hop_;
  std::optional<PerturbedPotential> V_;
  std::optional<FourierKernel> M_;
  std::optional<DiagonalizeResult> result_;
  std::vector<Check> checks_;
  nlohmann::json report_ = nlohmann::json::object();
};

}  // namespace qpdiag::cli
