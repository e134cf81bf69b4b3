#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cmbreak::cli {

/// Runs one command line (args[0] is the program name). Normal output goes
/// to `out`; failures are reported on `err` as one JSON object
/// {"code", "message", "context"} and yield a nonzero status.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cmbreak::cli
