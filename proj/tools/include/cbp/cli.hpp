#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cbp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one `cbp` invocation. `args` excludes the program name. Results go to
/// `out` (or the --output file), diagnostics to `err`.
/// Returns 0 on success, 2 for usage or validation errors, 3 for numerical
/// failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cbp::cli
