#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace qspec::cli {

enum ExitCode : int { ok = 0, input_error = 2, theorem_violation = 3, numeric_failure = 4 };

std::string_view version();

// args excludes the program name. Reports go to `out` in the requested
// format and, with --out DIR, to files in DIR; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qspec::cli
