#pragma once

#include <stdexcept>
#include <string>

namespace gimspg {

enum class ErrorCode {
  kInvalidArgument = 1,
  kDomain = 2,
  kNumeric = 3,
  kIo = 4,
  kConfig = 5,
};

/// Exception carried through the C++ core. The C API maps `code()` onto
/// its status enum.
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

}  // namespace gimspg
