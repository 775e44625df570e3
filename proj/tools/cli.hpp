#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mvspec::cli {

/// Exit codes: 0 success, 1 check or numerical failure, 2 input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mvspec::cli
