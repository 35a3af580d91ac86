#pragma once

#include <iosfwd>

namespace mimpact::cli {

/// Entry point of the `mimpact` tool. Returns the process exit code:
/// 0 on success, 1 on a configuration or data error, 2 on a usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mimpact::cli
