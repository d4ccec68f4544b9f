#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gpkdv {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitIo = 3;

/// Command-line entry point. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gpkdv
