// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cycfuse {

using Rng = std::mt19937_64;

/// Derives an independent stream seed for the consumer `name` from one
/// global seed (FNV-1a of the name mixed through splitmix64). Adding a new
/// consumer never changes the seeds handed to existing ones.
constexpr std::uint64_t derive_seed(std::uint64_t global, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = global + 0x9e3779b97f4a7c15ULL * (h | 1ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace cycfuse
