// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include <json.hpp>

#include "cycfuse/model.hpp"

namespace cycfuse {

/// Checkpoint file layout:
///   8 bytes   magic "CYCFCKPT"
///   8 bytes   manifest length N, unsigned little-endian
///   N bytes   UTF-8 JSON manifest (architecture, tensor list, caller metadata)
///   payload   every tensor of parameter_views() order as f32 little-endian
struct Checkpoint {
  ModelParams<float> params;
  nlohmann::json manifest;
};

/// `metadata` is stored under the manifest key "metadata" (seed, mode, ...).
void save_checkpoint(const ModelParams<float>& params, const std::filesystem::path& path,
                     const nlohmann::json& metadata = nlohmann::json::object());

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cycfuse
