#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace afp {

enum ExitCode : int
{
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
};

//! Entry point behind the `afp` executable; args excludes the program name.
int run_cli(const std::vector<std::string>& args,
            std::ostream& out,
            std::ostream& err);

} // namespace afp
