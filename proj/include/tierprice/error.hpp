#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tierprice {

enum class ErrorCode {
  InvalidAlpha,
  InvalidShare,
  InvalidPrice,
  InvalidConfig,
  DomainError,
  NonPositiveCost,
  NonPositiveGamma,
  NoConvergence,
  OverflowGuard,
  EmptyBundle,
  MissingClassLabels,
  TooManyFlows,
  DegenerateBaseline,
  ParseError,
  MissingColumn,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Configuration problems map to CLI exit code 2, numerical failures to 3.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the logit solver; carries the last fixed-point residual.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, long iterations, double residual)
      : Error(ErrorCode::NoConvergence, what),
        iterations_(iterations),
        residual_(residual) {}

  long iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  long iterations_;
  double residual_;
};

}  // namespace tierprice
