#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qsdc::cli {

inline constexpr unsigned long long kDefaultSeed = 42;

// Runs qsdc-lab with args (program name excluded). Data goes to out,
// diagnostics to err. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qsdc::cli
