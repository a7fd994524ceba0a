#pragma once

#include "dcwave/io.hpp"

#include <iosfwd>
#include <string>

namespace dcwave {

// Exit codes: 0 pass, 1 failed check or I/O error, 2 usage or config error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Default configuration of a subcommand; user configs are merge-patched onto it.
json default_config(const std::string& command);

// Writes <dir>/<stem>.json as {config, results, versions} and <dir>/<stem>.csv. Refuses empty results.
void emit_report(const std::string& dir, const std::string& stem, const json& config, const json& results,
                 const CsvTable& csv);

}  // namespace dcwave
