#pragma once

#include <iosfwd>

namespace idexp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `idexp` tool. Returns 0 on success, 2 on a usage
/// error and 1 on a runtime error; diagnostics are one line on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace idexp::cli
