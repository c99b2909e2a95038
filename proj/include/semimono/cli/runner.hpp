#pragma once

#include "semimono/cli/config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace semimono::cli {

enum ExitCode : int {
    kExitPass = 0,
    kExitCheckFailed = 1,
    kExitConfigError = 2,
    kExitNumericalAbort = 3,
    kExitInternalError = 4,
};

/// Environment variable that relocates the artifact tree.
inline constexpr const char* kOutputRootEnv = "SEMIMONO_OUTPUT_ROOT";

/// One artifact file, named relative to the run directory.
struct Artifact {
    std::string name;
    std::string content;
};

struct RunOutcome {
    int exit_code = kExitPass;
    std::filesystem::path directory;
    std::vector<Artifact> artifacts;  // everything hashed, summary.json included
    nlohmann::ordered_json summary;
    nlohmann::ordered_json manifest;
};

/// output.directory, or <root>/<last component of output.directory> when
/// `root` is non-empty.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const std::string& root);

/// Lowercase hex SHA-1 of the git blob object for `content`.
std::string blob_hash(const std::string& content);

/// Hash over the sorted (name, blob hash) pairs of all artifacts.
std::string content_hash(std::vector<Artifact> artifacts);

/// Executes the configured study and writes manifest.json, summary.json and
/// the CSV files into `directory`. Numerical aborts are caught and reported
/// with exit code 3.
RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& directory);

/// Text listing of graphs, potentials, noise specs, schemes and studies.
std::string list_builtins();

/// Subcommand entry points; return the process exit code.
int run_command(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);
int validate_command(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

}  // namespace semimono::cli
