#pragma once

#include <stdexcept>
#include <string>

namespace ethlab {

// Status codes shared by the C API and the CLI exit codes.
enum class ErrorCode : int {
  spec = 2,     // invalid input, violated precondition, bad config, I/O
  numeric = 3,  // solver failure or post-hoc invariant violation
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

class SpecError : public Error {
public:
  explicit SpecError(const std::string& what) : Error(ErrorCode::spec, what) {}
};

class NumericError : public Error {
public:
  explicit NumericError(const std::string& what) : Error(ErrorCode::numeric, what) {}
};

}  // namespace ethlab
