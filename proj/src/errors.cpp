#include "qpdiag/errors.hpp"

namespace qpdiag {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config error";
    case ErrorKind::strip_exceeded: return "strip exceeded";
    case ErrorKind::schedule: return "schedule error";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::not_monotone: return "not monotone";
    case ErrorKind::monotonicity_budget: return "monotonicity budget exhausted";
    case ErrorKind::pole_proximity: return "pole proximity";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::resonance: return "resonance";
    case ErrorKind::grid: return "grid error";
    case ErrorKind::solver_bound: return "solver bound violated";
    case ErrorKind::series_truncation: return "series truncation";
    case ErrorKind::non_contraction: return "non-contraction";
    case ErrorKind::phase_excluded: return "phase excluded";
    case ErrorKind::regularity: return "regularity error";
    case ErrorKind::singular_kick: return "singular kick";
    case ErrorKind::schedule_overflow: return "schedule overflow";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::io: return "io error";
  }
  return "error";
}

}  // namespace qpdiag
