#pragma once

#include "honestrd/core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace honestrd::cli {

enum ExitCode : int
{
  exit_ok = 0,
  exit_io = 1,
  exit_parse = 2,
  exit_domain = 3,
  exit_numeric = 4,
};

//! Parses `x,y[,sigma2]` CSV text (header required, columns by name).
//! `has_sigma2` reports whether the variance column was present; when it is
//! absent sigma2 is filled with ones.
Design parse_csv(std::istream& in, bool& has_sigma2);

//! Shortest round-trip decimal; "inf", "-inf" or "nan" for non-finite values.
std::string format_number(double v);

int exit_code_for(ErrorKind kind);

//! Runs the command line; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace honestrd::cli
