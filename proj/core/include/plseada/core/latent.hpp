#pragma once

#include <vector>

#include "plseada/core/image.hpp"

namespace plseada {

/// The (z_u, z_d', z_d) triple: invariant code, compact style code, and
/// the style code expanded to the invariant code's dimension.
class LatentCode {
 public:
  LatentCode(std::vector<float> z_u, std::vector<float> z_d_prime, std::vector<float> z_d);

  const std::vector<float>& z_u() const noexcept { return z_u_; }
  const std::vector<float>& z_d_prime() const noexcept { return z_d_prime_; }
  const std::vector<float>& z_d() const noexcept { return z_d_; }

 private:
  std::vector<float> z_u_;
  std::vector<float> z_d_prime_;
  std::vector<float> z_d_;
};

/// Image-space split x' = x_u + alpha * x_d. The sum is formed on
/// construction so the identity holds for every instance.
class Decomposition {
 public:
  Decomposition(Image x_u, Image x_d, double alpha);

  const Image& x_u() const noexcept { return x_u_; }
  const Image& x_d() const noexcept { return x_d_; }
  const Image& x_prime() const noexcept { return x_prime_; }
  double alpha() const noexcept { return alpha_; }

 private:
  Image x_u_;
  Image x_d_;
  Image x_prime_;
  double alpha_;
};

/// Elementwise x_u + alpha * x_d in single precision.
std::vector<float> pseudo_linear_sum(std::span<const float> x_u, std::span<const float> x_d,
                                     float alpha);

}  // namespace plseada
