#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ivspline::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitInfeasible = 4;

/// Runs the command line given without the program name, e.g.
/// {"fit", "--input", "data.csv", "--lambda", "0.1", "--out", "fit.json"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ivspline::cli
