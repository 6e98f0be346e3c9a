#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbp {

enum class ErrorKind {
  OutOfRange,
  GridTooSmall,
  GreyConditionFails,
  QuadratureNotConverged,
  RangeError,
  DegenerateCondition,
  NotRegularlyVarying,
  InversionUnstable,
  StepPolicyInvalid,
  PathNeverPositive,
  NotExtinct,
  ScaleTooCoarse,
  EmptyEnsemble,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind);

/// True for failures caused by bad input, false for numerical breakdowns.
bool is_validation_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cbp
