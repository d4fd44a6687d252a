#pragma once

#include <ostream>

namespace abm {

// Exit codes: 0 success, 1 a check failed (oracle-check), 2 usage or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace abm
