#pragma once

namespace xsum {

// Parses argv, runs one command, and returns the process exit code:
// 0 success, 2 configuration error, 3 data error, 4 numeric failure.
int run_cli(int argc, char** argv);

}  // namespace xsum
