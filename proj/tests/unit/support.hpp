#pragma once

#include <cmath>
#include <optional>

#include "cbp/error.hpp"

namespace testing {

// Kind of the cbp::Error thrown by f, or nullopt if it returned normally.
template <class F>
std::optional<cbp::ErrorKind> thrown_kind(F&& f) {
  try {
    f();
  } catch (const cbp::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace testing
