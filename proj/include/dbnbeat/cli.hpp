#pragma once

#include <iosfwd>

namespace dbnbeat {

/// Entry point of the `dbnbeat` command-line tool. Summaries go to `out` as
/// key=value lines, diagnostics to `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dbnbeat
