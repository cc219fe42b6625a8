#pragma once

#include <string>
#include <vector>

namespace casim::cli {

// Exit codes: 0 clean, 1 oracle violation (replay seed printed), 2 bad usage.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // in-process testing convenience

}  // namespace casim::cli
