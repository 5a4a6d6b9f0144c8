#pragma once

#include <stdexcept>
#include <string>

namespace ellreg {

enum class ErrorKind {
  DomainError,
  NonConvergence,
  PrecisionTooLow,
  BadReduction,
  NotOnCurve,
  PoleAtLattice,
  DegreeNonZero,
  AbelConditionFailed,
  ConjugationMismatch,
  RamifiedPrime,
  CalibrationFailed,
  NotCalibrated,
  BoundExceeded,
  ParseError,
  InternalError,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::PrecisionTooLow: return "PrecisionTooLow";
    case ErrorKind::BadReduction: return "BadReduction";
    case ErrorKind::NotOnCurve: return "NotOnCurve";
    case ErrorKind::PoleAtLattice: return "PoleAtLattice";
    case ErrorKind::DegreeNonZero: return "DegreeNonZero";
    case ErrorKind::AbelConditionFailed: return "AbelConditionFailed";
    case ErrorKind::ConjugationMismatch: return "ConjugationMismatch";
    case ErrorKind::RamifiedPrime: return "RamifiedPrime";
    case ErrorKind::CalibrationFailed: return "CalibrationFailed";
    case ErrorKind::NotCalibrated: return "NotCalibrated";
    case ErrorKind::BoundExceeded: return "BoundExceeded";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InternalError: return "InternalError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg),
        kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace ellreg
