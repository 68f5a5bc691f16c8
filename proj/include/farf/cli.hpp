#pragma once

// Command-line front end: run, sweep, ablate, infer-schema.

#include <iosfwd>

namespace farf {

/// Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace farf
