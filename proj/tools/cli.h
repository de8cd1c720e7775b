#pragma once

#include <ostream>

namespace reachsdp::cli {

/// Entry point of the reach_sos command line. Returns the process exit
/// status; failures also emit one JSON error record on `err`.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace reachsdp::cli
