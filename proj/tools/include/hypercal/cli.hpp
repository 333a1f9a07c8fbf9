#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

namespace hypercal::cli {

/// Runs the `hypercal` command line. Returns the process exit code; on
/// failure exactly one line `error code=<code> message="<text>"` goes to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string error_line(std::string_view code, std::string_view message);

}  // namespace hypercal::cli
