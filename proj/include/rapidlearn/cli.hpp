#pragma once

#include <iosfwd>

namespace rapidlearn {

// Entry point shared by the rapidlearn binary and the tests. Returns the
// process exit status: 0 ok, 1 runtime failure, 2 usage or validation.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rapidlearn
