#pragma once

#include <filesystem>

#include "plseada/core/dataset.hpp"

namespace plseada {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kManifestFileName = "manifest.json";

/// Raw little-endian float32, row-major, no header.
Image read_raw_image(const std::filesystem::path& path, const Shape& shape);
void write_raw_image(const std::filesystem::path& path, const Image& image);

/// Reads `dir/manifest.json`; image refs become absolute file paths.
Dataset load_manifest(const std::filesystem::path& dir);

/// Writes every image as `images/<index>.f32` plus `manifest.json`.
/// Returns the dataset re-pointed at the written files.
Dataset write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace plseada
