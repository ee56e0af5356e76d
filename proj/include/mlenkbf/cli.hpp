#pragma once

#include <iosfwd>

namespace mlenkbf {

// Command-line entry point. Returns 0 on success, 1 on usage errors (bad
// flags, missing config file), 2 on runtime errors.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mlenkbf
