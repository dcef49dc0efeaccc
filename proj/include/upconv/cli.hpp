#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "upconv/config.hpp"

namespace upconv {

/// "START:STEP:END" in degrees, inclusive; throws ConfigError on malformed text.
SweepSettings parse_angle_settings(const std::string& text);
/// The same range expanded to radians.
std::vector<double> parse_angle_range(const std::string& text);

/// Entry point of the command-line tool. Returns the process exit status.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace upconv
