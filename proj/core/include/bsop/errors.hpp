#pragma once

#include <stdexcept>
#include <string>

namespace bsop {

enum class ErrorKind {
  Domain,
  SingularDispersion,
  DivergentSum,
  Degenerate,
  Estimation,
  SingularSymbol,
  MemoryGuard,
  Numerical,
  IllConditioned,
  NotOnCurve,
  RegimeViolation,
  HypothesisViolation,
  Tracing,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::SingularDispersion: return "singular dispersion";
    case ErrorKind::DivergentSum: return "divergent sum";
    case ErrorKind::Degenerate: return "degenerate input";
    case ErrorKind::Estimation: return "estimation error";
    case ErrorKind::SingularSymbol: return "singular symbol";
    case ErrorKind::MemoryGuard: return "memory guard";
    case ErrorKind::Numerical: return "numerical failure";
    case ErrorKind::IllConditioned: return "ill-conditioned gradient";
    case ErrorKind::NotOnCurve: return "not on curve";
    case ErrorKind::RegimeViolation: return "regime violation";
    case ErrorKind::HypothesisViolation: return "hypothesis violation";
    case ErrorKind::Tracing: return "tracing failure";
  }
  return "error";
}

}  // namespace bsop
