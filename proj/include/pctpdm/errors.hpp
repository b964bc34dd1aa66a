#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pctpdm {

enum class ErrorKind {
  DomainViolation,
  IntegrationFailure,
  NonFiniteIntegrand,
  SingularPoint,
  InvalidParams,
  EmptyDomain,
  NonNormalizable,
  SingularMass,
  InvalidGrid,
  ConvergenceFailure,
  ParseError,
  UnknownProfile,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::DomainViolation: return "DomainViolation";
  case ErrorKind::IntegrationFailure: return "IntegrationFailure";
  case ErrorKind::NonFiniteIntegrand: return "NonFiniteIntegrand";
  case ErrorKind::SingularPoint: return "SingularPoint";
  case ErrorKind::InvalidParams: return "InvalidParams";
  case ErrorKind::EmptyDomain: return "EmptyDomain";
  case ErrorKind::NonNormalizable: return "NonNormalizable";
  case ErrorKind::SingularMass: return "SingularMass";
  case ErrorKind::InvalidGrid: return "InvalidGrid";
  case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
  case ErrorKind::ParseError: return "ParseError";
  case ErrorKind::UnknownProfile: return "UnknownProfile";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit code without parsing messages.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace pctpdm
