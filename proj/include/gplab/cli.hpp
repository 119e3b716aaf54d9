#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace gplab::cli {

enum ExitCode : int { ok = 0, validation_failure = 1, numerical_failure = 2 };

struct RunConfig {
    std::string subcommand;
    std::filesystem::path config_path;  // empty: built-in defaults
    std::filesystem::path out_dir = "out";
    int verbosity = 0;
    std::map<std::string, double> tolerances;  // fock-check tolerance overrides
};

/// Parses argv, runs the subcommand and writes its artifacts under the output directory.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace gplab::cli
