#include "tierprice/error.hpp"

namespace tierprice {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::InvalidShare: return "InvalidShare";
    case ErrorCode::InvalidPrice: return "InvalidPrice";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NonPositiveCost: return "NonPositiveCost";
    case ErrorCode::NonPositiveGamma: return "NonPositiveGamma";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::OverflowGuard: return "OverflowGuard";
    case ErrorCode::EmptyBundle: return "EmptyBundle";
    case ErrorCode::MissingClassLabels: return "MissingClassLabels";
    case ErrorCode::TooManyFlows: return "TooManyFlows";
    case ErrorCode::DegenerateBaseline: return "DegenerateBaseline";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::DomainError:
    case ErrorCode::NonPositiveGamma:
    case ErrorCode::NoConvergence:
    case ErrorCode::OverflowGuard:
    case ErrorCode::DegenerateBaseline:
      return true;
    default:
      return false;
  }
}

}  // namespace tierprice
