#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phil {

enum class ErrorCode {
  InvalidArgument,
  NonProper,
  DegenerateDenominator,
  DomainMismatch,
  DimensionMismatch,
  AlgebraicLoop,
  NearPole,
  UnstableSystem,
  SingularTransform,
  CutoffAboveNyquist,
  NotStabilizable,
  NotDetectable,
  RankDeficientD12,
  RankDeficientD21,
  GammaInfeasible,
  RiccatiDivergence,
  NoStabilizingSolution,
  IterationDiverged,
  NonFiniteState,
  EmptyTrace,
  BracketInvalid,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (and tests) can branch on the kind of failure, not on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonProper: return "NonProper";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::AlgebraicLoop: return "AlgebraicLoop";
    case ErrorCode::NearPole: return "NearPole";
    case ErrorCode::UnstableSystem: return "UnstableSystem";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::CutoffAboveNyquist: return "CutoffAboveNyquist";
    case ErrorCode::NotStabilizable: return "NotStabilizable";
    case ErrorCode::NotDetectable: return "NotDetectable";
    case ErrorCode::RankDeficientD12: return "RankDeficientD12";
    case ErrorCode::RankDeficientD21: return "RankDeficientD21";
    case ErrorCode::GammaInfeasible: return "GammaInfeasible";
    case ErrorCode::RiccatiDivergence: return "RiccatiDivergence";
    case ErrorCode::NoStabilizingSolution: return "NoStabilizingSolution";
    case ErrorCode::IterationDiverged: return "IterationDiverged";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::BracketInvalid: return "BracketInvalid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace phil
