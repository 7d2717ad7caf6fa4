#include "plseada/viz/png.hpp"

#include <cstring>

#include <png.h>

#include "plseada/core/error.hpp"

namespace plseada::viz {

void write_png(const Raster& raster, const std::filesystem::path& path) {
  if (raster.channels != 1 && raster.channels != 3) throw ContractError("PNG rasters must have 1 or 3 channels");
  if (raster.pixels.size() != raster.width * raster.height * raster.channels || raster.width == 0) {
    throw ContractError("raster buffer does not match its dimensions");
  }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width);
  image.height = static_cast<png_uint_32>(raster.height);
  image.format = raster.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, raster.pixels.data(), 0, nullptr)) {
    throw MissingArtifact("cannot write " + path.string() + ": " + image.message);
  }
}

Raster read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw MissingArtifact("cannot read " + path.string() + ": " + image.message);
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Raster out(image.width, image.height, gray ? 1 : 3);
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    throw MissingArtifact("cannot decode " + path.string() + ": " + image.message);
  }
  return out;
}

}  // namespace plseada::viz
