#pragma once

#include <ostream>

namespace devassist {

// Exit codes: 0 success, 1 findings or degraded result, 2 usage or parse
// error, 3 I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDegraded = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace devassist
