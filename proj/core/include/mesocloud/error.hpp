#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mesocloud {

enum class ErrorCode {
  InvalidArgument,
  NonPositiveRadicand,
  OutsideDomain,
  CoincidentPoints,
  InsideVoid,
  SourceOverlapsCloud,
  SingularSystem,
  NotConverged,
  OracleNotConverged,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception type for every failure raised by the library. The code lets the
/// CLI map failures onto its exit-code contract without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Solver-side failure that carries the iteration state at the time of abort.
class NotConvergedError : public Error {
 public:
  NotConvergedError(int iterations, double residual, const std::string& what)
      : Error(ErrorCode::NotConverged, what), iterations_(iterations), residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class OracleNotConvergedError : public Error {
 public:
  OracleNotConvergedError(double residual, const std::string& what)
      : Error(ErrorCode::OracleNotConverged, what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace mesocloud
