#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ostd::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kIo = 3;
inline constexpr int kData = 4;

// Runs one `ostd` invocation. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ostd::cli
