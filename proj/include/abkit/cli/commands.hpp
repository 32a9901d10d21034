#pragma once

#include <ostream>

namespace abkit::cli {

// Exit status: 0 success, 1 domain error, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// Parses argv, runs one subcommand (serve, make-hits, qc, analyze, train,
// eval, report) and writes a manifest.json next to its artifacts.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace abkit::cli
