#pragma once

namespace camal::cli {

// Entry point of the `camal` tool. Exit codes: 0 success, 2 invalid
// configuration or arguments, 3 engine or storage failure.
int run(int argc, char** argv);

}  // namespace camal::cli
