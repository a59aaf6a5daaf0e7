#include "bandlab/errors.hpp"

namespace bandlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularLattice: return "SingularLattice";
    case ErrorCode::EmptyBasis: return "EmptyBasis";
    case ErrorCode::BrokenHermitianSymmetry: return "BrokenHermitianSymmetry";
    case ErrorCode::IllPosedSpec: return "IllPosedSpec";
    case ErrorCode::DominationViolated: return "DominationViolated";
    case ErrorCode::SingularArgument: return "SingularArgument";
    case ErrorCode::OrderTooHigh: return "OrderTooHigh";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::BandCountExceedsBasis: return "BandCountExceedsBasis";
    case ErrorCode::UnreachableFilling: return "UnreachableFilling";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NoBasisChangeOnPath: return "NoBasisChangeOnPath";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace bandlab
