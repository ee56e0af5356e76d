#pragma once

#include <string_view>

namespace mlenkbf {

// Warnings go to stderr unless silenced; each distinct topic is reported at most
// a few times per process so long runs do not flood the terminal.
void set_quiet(bool quiet);
bool quiet();
void warn(std::string_view topic, std::string_view message);

}  // namespace mlenkbf
