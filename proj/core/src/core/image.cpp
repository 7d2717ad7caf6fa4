#include "plseada/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plseada/core/error.hpp"

namespace plseada {

void validate_image_shape(const Shape& shape) {
  if (shape.size() != 3 && shape.size() != 4) {
    throw ContractError("image shape must be (C, H, W) or (C, D, H, W), got " +
                        to_string(shape));
  }
  for (auto extent : shape) {
    if (extent == 0) throw ContractError("image shape has a zero extent: " + to_string(shape));
  }
}

Image::Image(Shape shape, std::vector<float> values, std::optional<std::vector<double>> spacing)
    : shape_(std::move(shape)), values_(std::move(values)), spacing_(std::move(spacing)) {
  validate_image_shape(shape_);
  if (element_count(shape_) != values_.size()) {
    throw ContractError("image has " + std::to_string(values_.size()) +
                        " values but shape " + to_string(shape_));
  }
  if (spacing_ && spacing_->size() != spatial_rank()) {
    throw ContractError("image spacing must have one entry per spatial axis");
  }
  for (float v : values_) {
    if (!std::isfinite(v)) throw ContractError("image contains a non-finite value");
  }
}

Image Image::zeros(const Shape& shape) { return filled(shape, 0.0f); }

Image Image::filled(const Shape& shape, float value) {
  validate_image_shape(shape);
  return Image(shape, std::vector<float>(element_count(shape), value));
}

float Image::min() const { return *std::min_element(values_.begin(), values_.end()); }
float Image::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Image::mean() const {
  double sum = std::accumulate(values_.begin(), values_.end(), 0.0);
  return sum / static_cast<double>(values_.size());
}

}  // namespace plseada
