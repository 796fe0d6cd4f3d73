#include "qcml/errors.hpp"

namespace qcml {

const char* error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::BelowRange: return "BelowRangeError";
    case ErrorKind::Extrapolation: return "ExtrapolationError";
    case ErrorKind::Hypothesis: return "HypothesisError";
    case ErrorKind::UnsupportedKind: return "UnsupportedKindError";
    case ErrorKind::Geometry: return "GeometryError";
    case ErrorKind::NoCrossover: return "NoCrossoverError";
    case ErrorKind::Singularity: return "SingularityError";
    case ErrorKind::InconsistentK: return "InconsistentKError";
    case ErrorKind::Integration: return "IntegrationError";
    case ErrorKind::Undecidable: return "UndecidableError";
    case ErrorKind::Solver: return "SolverError";
    case ErrorKind::Sampling: return "SamplingError";
  }
  return "Error";
}

int error_kind_exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return 1;
    case ErrorKind::Integration:
    case ErrorKind::Undecidable:
    case ErrorKind::Solver:
    case ErrorKind::Sampling: return 3;
    default: return 2;
  }
}

}  // namespace qcml
