#pragma once

#include <stdexcept>
#include <string>

namespace qpdiag {

enum class ErrorKind {
  config,
  strip_exceeded,
  schedule,
  divergence,
  not_monotone,
  monotonicity_budget,
  pole_proximity,
  domain,
  resonance,
  grid,
  solver_bound,
  series_truncation,
  non_contraction,
  phase_excluded,
  regularity,
  singular_kick,
  schedule_overflow,
  parse,
  io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qpdiag
