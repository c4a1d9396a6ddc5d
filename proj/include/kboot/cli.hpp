#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace kboot::cli {

/// Angle literal: plain radians ("0.314"), or a multiple of pi such as
/// "0.1pi", "pi/10", "-2pi/5". Decimal coefficients are applied as an exact
/// ratio, so "0.1pi" == pi/10 bit for bit.
double parse_angle(std::string_view text);

/// Parses `key=value` lines ('#' comments, blank lines ignored) into
/// `--key=value` arguments.
std::vector<std::string> config_file_arguments(const std::string& path);

/// Runs the command line (without the program name). Returns the exit code.
/// Normal output goes to `out`, diagnostics to `err`.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace kboot::cli
