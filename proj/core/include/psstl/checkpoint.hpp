// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "psstl/param.hpp"

namespace psstl {

/// Checkpoint JSON:
///   {"model":"content|propagation|student","config_hash":"...","seed":N,
///    "params":{name:{"shape":[r,c],"data":[...]}, ...}}
/// Parameters are written in name order with doubles at %.17g.
std::string serialize_checkpoint(const std::string& model, const std::string& config_hash,
                                 std::uint64_t seed, std::span<Param* const> params);
void save_checkpoint(const std::filesystem::path& path, const std::string& model,
                     const std::string& config_hash, std::uint64_t seed,
                     std::span<Param* const> params);

struct CheckpointInfo {
  std::string model;
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// Loads values into `params` by name. Every param must be present with a
/// matching shape, and the model kind must match.
CheckpointInfo load_checkpoint(const std::filesystem::path& path, const std::string& model,
                               std::span<Param* const> params);

}  // namespace psstl
