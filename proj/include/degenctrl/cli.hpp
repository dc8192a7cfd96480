#pragma once

// Batch front end: strict flat-JSON scenario parsing, command dispatch,
// CSV/JSON artifacts and a run manifest with SHA-256 content hashes.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "degenctrl/error.hpp"
#include "degenctrl/model.hpp"

namespace degenctrl::cli {

enum ExitCode : int {
    kOk = 0,
    kInvariantFailure = 1,
    kUsageError = 2,
    kNotConverged = 3,
    kMissingFile = 4,
};

/// Unknown key, type mismatch or out-of-range option.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class MissingFileError : public Error {
public:
    using Error::Error;
};

const std::vector<std::string>& command_names();

struct RunConfig {
    std::string command;
    ModelConfig model;
    nlohmann::json options;  // command options with defaults applied
    std::uint64_t seed = 0;

    /// Model fields, options and seed as one flat object.
    [[nodiscard]] nlohmann::json resolved() const;
};

/// Validates `doc` against the command's schema and fills defaults. A seed
/// override replaces any "seed" key.
RunConfig parse_config(const std::string& command, const nlohmann::json& doc,
                       std::optional<std::uint64_t> seed_override = std::nullopt);
RunConfig parse_config_file(const std::string& command, const std::filesystem::path& path,
                            std::optional<std::uint64_t> seed_override = std::nullopt);

struct RunOutcome {
    int exit_code = kOk;
    std::string message;
    std::vector<std::string> artifacts;  // file names relative to the output directory
};

/// Runs one parsed command, writing artifacts and manifest.json into `out`.
RunOutcome run_command(const RunConfig& config, const std::filesystem::path& out);

/// `degenctrl <command> --config <file> --out <dir> [--seed N]`
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// %.17g with '.' as decimal separator.
std::string format_double(double v);

}  // namespace degenctrl::cli
