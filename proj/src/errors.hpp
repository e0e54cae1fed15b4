#pragma once

#include <stdexcept>
#include <string>

namespace ncgl {

enum class ErrorCode {
  Structural,     // shape or algebra mismatch
  Domain,         // argument outside the mathematical domain of an operation
  NumericalRank,  // singular Gram system or rank-deficient basis
  Instability,    // projection drift beyond the snapping guard
  Config,         // invalid experiment configuration
  Io,             // unreadable or unwritable file
};

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

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace ncgl
