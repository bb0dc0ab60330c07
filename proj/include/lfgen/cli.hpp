#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lfgen::cli {

enum ExitCode { kOk = 0, kUsageError = 1, kComputationError = 2 };

/// Runs one command line. `args` excludes the program name. Data goes to `out`
/// when no --out path is given; diagnostics go to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace lfgen::cli
