#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qk {

enum ExitCode { exit_ok = 0, exit_domain_error = 1, exit_usage_error = 2 };

// Runs one command line (without the program name). Results go to
// <output dir>/<group>-<command>[-<tag>].json. CSV side files share the stem.
// The wall-clock timestamp goes to a separate .stamp.json file so that records compare byte for byte.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qk
