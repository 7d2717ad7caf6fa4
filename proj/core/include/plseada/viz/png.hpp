#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace plseada::viz {

/// 8-bit raster, `channels` 1 (gray) or 3 (RGB), row-major interleaved.
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> pixels;

  Raster() = default;
  Raster(std::size_t w, std::size_t h, std::size_t c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), pixels(w * h * c, fill) {}

  std::uint8_t* at(std::size_t x, std::size_t y) { return pixels.data() + (y * width + x) * channels; }
};

void write_png(const Raster& raster, const std::filesystem::path& path);
Raster read_png(const std::filesystem::path& path);

}  // namespace plseada::viz
