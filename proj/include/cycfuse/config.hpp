// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cycfuse/model.hpp"
#include "cycfuse/trainer.hpp"

namespace cycfuse {

enum class RunMode { blind, noblind, baseline };

std::string to_string(RunMode mode);
RunMode parse_run_mode(const std::string& s);

/// Environment variable that, when set, replaces the configured output directory.
inline constexpr const char* kOutputDirEnv = "CYCFUSE_OUTPUT_DIR";

struct ExperimentConfig {
  // Data: either a ground-truth cube to simulate from, or a precomputed pair.
  std::optional<std::filesystem::path> ground_truth;
  std::optional<std::filesystem::path> lr_hsi;
  std::optional<std::filesystem::path> hr_msi;
  std::optional<std::filesystem::path> srf_csv;
  std::optional<std::filesystem::path> psf_csv;
  std::filesystem::path output_dir = "out";

  int scale = 32;
  /// Band count of a synthetic Gaussian SRF, used when simulating from
  /// ground truth without an SRF file.
  std::optional<int> msi_bands;
  std::vector<int> widths{32, 64, 128, 128, 128};
  LogitInit logit_init = LogitInit::kaiming;

  RunMode mode = RunMode::blind;
  std::uint64_t seed = 0;
  std::optional<double> noise_snr_db;

  /// Seed and mode live at the top level; those fields of `train` are
  /// ignored and filled in by train_config().
  TrainConfig train;

  void validate() const;
  TrainConfig train_config() const;
  Architecture architecture(int hsi_bands, int msi_bands) const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses a config object. Relative paths resolve against `base_dir`.
/// Unknown keys and invariant violations raise ConfigError.
ExperimentConfig parse_config_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Reads a UTF-8 JSON file; relative paths resolve against its directory.
/// Applies the output-dir environment override.
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Full object with every field written out; parsing it back reproduces `cfg`.
nlohmann::json serialize_config(const ExperimentConfig& cfg);

}  // namespace cycfuse
