#pragma once

#include <string>
#include <vector>

namespace slimtag {

// Full command surface. Exit codes: 0 success, 1 usage/config error,
// 2 data/validation error, 3 numeric divergence, 4 I/O or corruption.
int run_cli(const std::vector<std::string>& args);

}  // namespace slimtag
