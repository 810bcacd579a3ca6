#pragma once

#include <stdexcept>
#include <string>

namespace dagbandit {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Parse,
  CycleDetected,
  NoPath,
  TooManyPaths,
  DimensionMismatch,
  UnknownEdge,
  InvalidPath,
  NonPositiveCoordinate,
  Infeasible,
  SolverStall,
  ZeroMarginal,
  DeadEnd,
  UnequalLengths,
  OutOfRangeLoss,
  ProtocolViolation,
  RangeViolation,
  MalformedGame,
  NoWalk,
  Config,
};

const char* error_code_name(ErrorCode code);

// Every failure in the library surfaces as this exception; the C API maps
// the code onto a status value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace dagbandit
