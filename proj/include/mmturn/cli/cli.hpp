#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mmturn/core/error.hpp"

namespace mmturn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

int exit_code(ErrorKind kind);

/// Runs one subcommand. `args` excludes the program name. Errors are reported on `err`
/// as a single JSON line and mapped to the exit code.
int run_command(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

/// Flat `key = value` lines; '#' starts a comment. Returns `--key value...` arguments:
/// unquoted values split on whitespace, "true" is a bare flag, "false" is dropped.
std::vector<std::string> config_file_arguments(const std::string& text);

}  // namespace mmturn::cli
