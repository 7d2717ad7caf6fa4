#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "plseada/nets/network.hpp"

namespace plseada::nets {

inline constexpr int kCheckpointSchemaVersion = 1;

/// Single-file archive: 8-byte magic, u64 header length, JSON header
/// (schema_version, model kind, network config, metadata, tensor table),
/// then every named parameter as raw little-endian float32.
void save_checkpoint(ModelBundle& bundle, const std::filesystem::path& path,
                     const nlohmann::json& metadata = nlohmann::json::object());

struct LoadedCheckpoint {
  ModelBundle bundle;
  nlohmann::json metadata;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Loads parameters into an existing bundle; any config or tensor-table
/// mismatch raises ConfigError.
nlohmann::json load_checkpoint_into(ModelBundle& bundle, const std::filesystem::path& path);

}  // namespace plseada::nets
