#pragma once

#include <iosfwd>

namespace hotelling {

// Exit codes: 0 success/verified, 1 usage error, 2 verification or
// construction failed, 3 internal oracle mismatch.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace hotelling
