// SPDX-License-Identifier: Apache-2.0
#include "cycfuse/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cycfuse/error.hpp"

namespace cycfuse {

using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic{'C', 'Y', 'C', 'F', 'C', 'K', 'P', 'T'};

template <typename U>
U byteswap_if_big(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U out = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (sizeof(U) - 1 - i));
    return out;
  } else {
    return v;
  }
}

}  // namespace

void save_checkpoint(const ModelParams<float>& params, const std::filesystem::path& path, const json& metadata) {
  json manifest;
  manifest["format"] = "cycfuse-checkpoint";
  manifest["version"] = 1;
  manifest["dtype"] = "f32le";
  manifest["hsi_bands"] = params.arch.hsi_bands;
  manifest["msi_bands"] = params.arch.msi_bands;
  manifest["scale"] = params.arch.scale;
  manifest["widths"] = params.arch.widths;
  manifest["logit_init"] = params.arch.logit_init == LogitInit::kaiming ? "kaiming" : "uniform";
  manifest["frozen_degradation"] = params.frozen_degradation;
  manifest["metadata"] = metadata;
  json tensors = json::array();
  std::vector<char> payload;
  for (const auto& view : parameter_views(params)) {
    tensors.push_back({{"name", view.name}, {"shape", view.shape}, {"count", view.values.size()}});
    for (float v : view.values) {
      const std::uint32_t raw = byteswap_if_big(std::bit_cast<std::uint32_t>(v));
      char bytes[4];
      std::memcpy(bytes, &raw, 4);
      payload.insert(payload.end(), bytes, bytes + 4);
    }
  }
  manifest["tensors"] = tensors;

  const std::string text = manifest.dump();
  const std::uint64_t length = byteswap_if_big(static_cast<std::uint64_t>(text.size()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  out.write(reinterpret_cast<const char*>(&length), sizeof length);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError(path.string() + " is not a checkpoint");
  }
  std::uint64_t length = 0;
  std::memcpy(&length, bytes.data() + 8, 8);
  length = byteswap_if_big(length);
  if (length > bytes.size() - 16) throw IntegrityError("checkpoint manifest length exceeds file size");

  json manifest;
  try {
    manifest = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(length));
  } catch (const json::exception& e) {
    throw FormatError(std::string("corrupt checkpoint manifest: ") + e.what());
  }

  Architecture arch;
  try {
    arch.hsi_bands = manifest.at("hsi_bands").get<int>();
    arch.msi_bands = manifest.at("msi_bands").get<int>();
    arch.scale = manifest.at("scale").get<int>();
    arch.widths = manifest.at("widths").get<std::vector<int>>();
    arch.logit_init = manifest.value("logit_init", "kaiming") == "uniform" ? LogitInit::uniform : LogitInit::kaiming;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint manifest: ") + e.what());
  }

  ModelParams<float> params = zeros_like(init_params<float>(arch, 0));
  params.frozen_degradation = manifest.value("frozen_degradation", false);
  auto views = parameter_views(params);
  const auto& tensors = manifest.at("tensors");
  if (tensors.size() != views.size()) throw IntegrityError("checkpoint tensor count does not match architecture");

  std::size_t offset = 16 + length;
  for (std::size_t k = 0; k < views.size(); ++k) {
    if (tensors[k].at("name") != views[k].name || tensors[k].at("count").get<std::size_t>() != views[k].values.size()) {
      throw IntegrityError("checkpoint tensor '" + tensors[k].at("name").get<std::string>() + "' mismatches architecture");
    }
    const std::size_t need = views[k].values.size() * 4;
    if (offset + need > bytes.size()) throw IntegrityError("checkpoint payload truncated");
    for (std::size_t i = 0; i < views[k].values.size(); ++i) {
      std::uint32_t raw;
      std::memcpy(&raw, bytes.data() + offset + 4 * i, 4);
      views[k].values[i] = std::bit_cast<float>(byteswap_if_big(raw));
    }
    offset += need;
  }
  if (offset != bytes.size()) throw IntegrityError("checkpoint has trailing bytes");
  return Checkpoint{std::move(params), std::move(manifest)};
}

}  // namespace cycfuse
