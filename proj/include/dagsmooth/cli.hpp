#pragma once

namespace dagsmooth {

/// Command-line entry point (subcommands: smooth, select, simulate,
/// validate). Exit codes: 0 success, 1 validation failure, 2 usage error,
/// 3 input error.
int run_cli(int argc, const char* const* argv);

}  // namespace dagsmooth
