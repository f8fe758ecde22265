#include "magnetic_gaps/error.hpp"

namespace magnetic_gaps {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::DegenerateZeroSet: return "DegenerateZeroSet";
    case ErrorKind::NewtonDivergence: return "NewtonDivergence";
    case ErrorKind::NonIntegerOrder: return "NonIntegerOrder";
    case ErrorKind::LowerBoundFailure: return "LowerBoundFailure";
    case ErrorKind::ResolutionError: return "ResolutionError";
    case ErrorKind::SolverStagnation: return "SolverStagnation";
    case ErrorKind::BlockDeflationFailure: return "BlockDeflationFailure";
    case ErrorKind::TruncationDominated: return "TruncationDominated";
    case ErrorKind::OutOfValidatedRange: return "OutOfValidatedRange";
    case ErrorKind::NonIntegerFlux: return "NonIntegerFlux";
    case ErrorKind::PartialSweep: return "PartialSweep";
    case ErrorKind::ConditionViolated: return "ConditionViolated";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace magnetic_gaps
