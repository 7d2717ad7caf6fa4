#pragma once

#include <optional>
#include <span>
#include <vector>

#include "plseada/core/shape.hpp"

namespace plseada {

/// Single- or multi-channel real raster, shape (C, H, W) or (C, D, H, W).
/// Values are row-major with the last axis fastest. Immutable once built.
class Image {
 public:
  Image() = default;
  Image(Shape shape, std::vector<float> values,
        std::optional<std::vector<double>> spacing = std::nullopt);

  static Image zeros(const Shape& shape);
  static Image filled(const Shape& shape, float value);

  const Shape& shape() const noexcept { return shape_; }
  std::span<const float> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::optional<std::vector<double>>& spacing() const noexcept { return spacing_; }

  std::size_t channels() const noexcept { return shape_.front(); }
  /// 2 for (C, H, W), 3 for (C, D, H, W).
  std::size_t spatial_rank() const noexcept { return shape_.size() - 1; }
  std::size_t depth() const noexcept { return shape_.size() == 4 ? shape_[1] : 1; }
  std::size_t height() const noexcept { return shape_[shape_.size() - 2]; }
  std::size_t width() const noexcept { return shape_.back(); }

  float operator[](std::size_t i) const noexcept { return values_[i]; }
  /// 2D accessor for channel c.
  float at(std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return values_[(c * height() + y) * width() + x];
  }

  float min() const;
  float max() const;
  double mean() const;

 private:
  Shape shape_;
  std::vector<float> values_;
  std::optional<std::vector<double>> spacing_;
};

/// Throws ContractError unless the shape is (C, H, W) or (C, D, H, W) with nonzero extents.
void validate_image_shape(const Shape& shape);

}  // namespace plseada
