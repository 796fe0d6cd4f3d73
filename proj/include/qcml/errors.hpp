#pragma once

#include <stdexcept>
#include <string>

namespace qcml {

enum class ErrorKind {
  Config,
  Domain,
  BelowRange,
  Extrapolation,
  Hypothesis,
  UnsupportedKind,
  Geometry,
  NoCrossover,
  Singularity,
  InconsistentK,
  Integration,
  Undecidable,
  Solver,
  Sampling,
};

const char* error_kind_name(ErrorKind kind) noexcept;

// Exit-code class: 1 configuration, 2 domain, 3 solver or undecidable.
int error_kind_exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace qcml
