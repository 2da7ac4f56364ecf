#pragma once

#include <iosfwd>

namespace semtask::cli {

/// Entry point shared by the executable and the tests. Returns the process
/// exit status: 0 success, 2 invalid input, 3 resource or degenerate data.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace semtask::cli
