#pragma once

#include <stdexcept>
#include <string>

namespace cantordim {

/// Error categories surfaced by the numerical modules. The CLI maps these to
/// exit codes: parse problems -> 2, method-inapplicability -> 3, runtime
/// numerical guards -> 4.
enum class ErrorKind {
  ParseError,
  ZeroRowSum,
  SingularPhi,
  RatioNotContractive,
  NotDegenerate,
  UnboundedIntegrand,
  ResonantDenominator,
  IdentityMap,
  PoleInside,
  ZeroProduct,
  DegenerateMap,
  MethodInapplicable,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ZeroRowSum: return "ZeroRowSum";
    case ErrorKind::SingularPhi: return "SingularPhi";
    case ErrorKind::RatioNotContractive: return "RatioNotContractive";
    case ErrorKind::NotDegenerate: return "NotDegenerate";
    case ErrorKind::UnboundedIntegrand: return "UnboundedIntegrand";
    case ErrorKind::ResonantDenominator: return "ResonantDenominator";
    case ErrorKind::IdentityMap: return "IdentityMap";
    case ErrorKind::PoleInside: return "PoleInside";
    case ErrorKind::ZeroProduct: return "ZeroProduct";
    case ErrorKind::DegenerateMap: return "DegenerateMap";
    case ErrorKind::MethodInapplicable: return "MethodInapplicable";
  }
  return "Unknown";
}

class CantorError : public std::runtime_error {
 public:
  CantorError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Process exit code the CLI uses for this kind.
  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::ParseError:
        return 2;
      case ErrorKind::ResonantDenominator:
      case ErrorKind::UnboundedIntegrand:
      case ErrorKind::ZeroProduct:
        return 4;
      default:
        return 3;
    }
  }

 private:
  ErrorKind kind_;
};

}  // namespace cantordim
