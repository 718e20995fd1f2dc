#pragma once

namespace entimg {

/// Command-line entry point. Exit codes: 0 success, 2 validation error,
/// 3 runtime or physics error.
int run_cli(int argc, char** argv);

} // namespace entimg
