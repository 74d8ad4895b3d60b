#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ksalsa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Subcommands: gen-toy-data, invert, cluster, average, release, eval-fd,
// eval-mia, grad-check. Returns 0 on success, 1 on a usage error (printed
// with the synopsis to `err`), 2 on a runtime error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace ksalsa::cli
