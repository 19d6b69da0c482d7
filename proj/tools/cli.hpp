#pragma once

#include <iosfwd>

namespace suglg {

/// Runs the command-line front end. Returns 0 on success, 1 on a usage
/// error and 2 on a data or numerical failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace suglg
