#pragma once

#include <stdexcept>
#include <string>

namespace qstab {

enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  divergent,     // a bound series does not converge for the given parameters
  open_problem,  // parameters fall in the region where no stability bound is known
  overflow,
  obstruction,   // finite-field characteristic divides a constant the derivation inverts
  too_large,
  config,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::divergent: return "divergent";
    case ErrorKind::open_problem: return "open-problem region";
    case ErrorKind::overflow: return "overflow";
    case ErrorKind::obstruction: return "obstruction";
    case ErrorKind::too_large: return "too-large";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

/// Every failure raised by the library carries a kind so callers (the harness
/// in particular) can map it onto a result status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace qstab
