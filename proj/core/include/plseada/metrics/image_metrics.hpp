#pragma once

#include <span>

#include "plseada/core/image.hpp"

namespace plseada::metrics {

/// Root mean squared elementwise difference. Shapes must match.
double rmse(std::span<const float> x, std::span<const float> x_prime);
double rmse(const Image& x, const Image& x_prime);

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  /// Dynamic range. Values <= 0 infer it from the data range of both inputs.
  double dynamic_range = 1.0;
};

/// Mean local SSIM with a Gaussian window, evaluated where the window fits
/// entirely inside the image. Works per channel on (C, H, W) or (C, D, H, W).
/// Throws ContractError when any spatial extent is smaller than the window.
double ssim(std::span<const float> x, std::span<const float> y, const Shape& shape,
            const SsimParams& params = {});
double ssim(const Image& x, const Image& y, const SsimParams& params = {});

/// Normalised 1D Gaussian weights of length `size`.
std::vector<double> gaussian_window(std::size_t size, double sigma);

}  // namespace plseada::metrics
