#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hexkerr {

enum class ErrorCode {
  InvalidArgument,
  NoCriticalWavenumber,
  Divergence,
  SymmetryViolation,
  NotConverged,
  SingularJacobian,
  NotGauged,
  MarginalMode,
  InconsistentResult,
  BasisTooLarge,
  BasisMismatch,
  NoHexagon,
  Config,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::NoCriticalWavenumber: return "no_critical_wavenumber";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::SymmetryViolation: return "symmetry_violation";
    case ErrorCode::NotConverged: return "not_converged";
    case ErrorCode::SingularJacobian: return "singular_jacobian";
    case ErrorCode::NotGauged: return "not_gauged";
    case ErrorCode::MarginalMode: return "marginal_mode";
    case ErrorCode::InconsistentResult: return "inconsistent_result";
    case ErrorCode::BasisTooLarge: return "basis_too_large";
    case ErrorCode::BasisMismatch: return "basis_mismatch";
    case ErrorCode::NoHexagon: return "no_hexagon";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hexkerr
