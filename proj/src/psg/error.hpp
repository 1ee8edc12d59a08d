#pragma once

#include <stdexcept>
#include <string>

namespace psg {

// Mirrors psg_status in the C header; values must stay in sync.
enum class ErrorCode : int {
  invalid_argument = 1,
  dimension_mismatch = 2,
  out_of_range = 3,
  divisibility = 4,
  cap_exceeded = 5,
  infeasible = 6,
  precondition = 7,
  not_converged = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace psg
