#pragma once

namespace emosig::cli {

// Parses argv, runs the selected subcommand and returns the process exit code:
// 0 success, 1 pipeline or data error, 2 usage or configuration error.
int run(int argc, char** argv);

}  // namespace emosig::cli
