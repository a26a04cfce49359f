#pragma once

#include <stdexcept>
#include <string>

namespace sinai {

enum class ErrorCode {
  InvalidArgument = 1,
  WindowExhausted = 2,
  Unsupported = 3,
  Io = 4,
  Parse = 5,
  Internal = 6,
  NotApplicable = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when a computation needs sites beyond the sampled window. Callers are
// expected to extend the environment and retry.
class WindowExhausted : public Error {
 public:
  explicit WindowExhausted(const std::string& what) : Error(ErrorCode::WindowExhausted, what) {}
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace sinai
