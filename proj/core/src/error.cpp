#include "cbp/error.hpp"

namespace cbp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::GreyConditionFails: return "GreyConditionFails";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::DegenerateCondition: return "DegenerateCondition";
    case ErrorKind::NotRegularlyVarying: return "NotRegularlyVarying";
    case ErrorKind::InversionUnstable: return "InversionUnstable";
    case ErrorKind::StepPolicyInvalid: return "StepPolicyInvalid";
    case ErrorKind::PathNeverPositive: return "PathNeverPositive";
    case ErrorKind::NotExtinct: return "NotExtinct";
    case ErrorKind::ScaleTooCoarse: return "ScaleTooCoarse";
    case ErrorKind::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

bool is_validation_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::QuadratureNotConverged:
    case ErrorKind::RangeError:
    case ErrorKind::DegenerateCondition:
    case ErrorKind::InversionUnstable:
      return false;
    default:
      return true;
  }
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace cbp
