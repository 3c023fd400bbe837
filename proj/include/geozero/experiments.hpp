#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geozero/config.hpp"

namespace geozero {

/// One file a command produces, held in memory until the command succeeds.
struct Artifact {
  std::string filename;
  std::string content;
};

struct CommandOutput {
  std::string name;
  std::vector<Artifact> artifacts;  // CSVs first, then SVGs
  nlohmann::json parameters;        // resolved inputs, SI units
  nlohmann::json summary;           // fits and headline numbers
};

/// Names accepted by run_command, in CLI order (accept excluded).
const std::vector<std::string>& command_names();

/// Runs one named experiment entirely in memory. Unset config fields take
/// the per-command defaults, tuned for the zero-field protocol at
/// delta' = 2pi x 3.04 MHz.
CommandOutput run_command(const std::string& name, const RunConfig& config);

/// Writes the artifacts plus a <name>.meta.json sidecar into `dir`. Files
/// are staged under temporary names and renamed at the end; on any failure
/// everything staged or renamed so far is removed.
std::vector<std::filesystem::path> write_outputs(const CommandOutput& output, const RunConfig& config,
                                                 const std::filesystem::path& dir);

/// "geozero <version> (<git describe>)".
std::string version_string();

}  // namespace geozero
