// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace cycfuse {

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr int kManifestSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitDivergence = 4 };

/// Written as manifest.json by every command that produces files.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> artifacts;  // relative to the manifest directory

  nlohmann::json to_json() const;
};

std::string utc_timestamp();

// Each command takes its arguments without the program/subcommand name and
// reports diagnostics on `err`. The return value is the process exit status.
int cmd_simulate(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_evaluate(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmd_report(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
/// Writes a synthetic ground-truth scene plus a matching Gaussian SRF CSV.
int cmd_synth(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Dispatches `argv[1]` to the matching command.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cycfuse
