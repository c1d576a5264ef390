#pragma once

#include <iosfwd>

namespace polaron2d {

// Command-line entry point, shared by the binary and by in-process tests.
// argv follows main() conventions.  Results go to out, diagnostics to
// err.  Exit codes: 0 success, 1 certification or verification failure,
// 2 usage or domain errors, 3 numeric, precision, or resource trouble.
int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace polaron2d
