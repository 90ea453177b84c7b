#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace csbp::cli {

enum ExitCode { Pass = 0, Failure = 1, Usage = 2, Inconclusive = 3 };

inline constexpr const char* out_dir_env = "CSBP_OUT_DIR";

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace csbp::cli
