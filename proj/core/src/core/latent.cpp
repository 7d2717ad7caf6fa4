#include "plseada/core/latent.hpp"

#include <cmath>

#include "plseada/core/error.hpp"

namespace plseada {

namespace {

void require_finite(const std::vector<float>& v, const char* name) {
  for (float x : v) {
    if (!std::isfinite(x)) throw ContractError(std::string(name) + " has a non-finite entry");
  }
}

}  // namespace

LatentCode::LatentCode(std::vector<float> z_u, std::vector<float> z_d_prime,
                       std::vector<float> z_d)
    : z_u_(std::move(z_u)), z_d_prime_(std::move(z_d_prime)), z_d_(std::move(z_d)) {
  if (z_d_.size() != z_u_.size()) {
    throw ContractError("z_d must have the same dimension as z_u (" +
                        std::to_string(z_d_.size()) + " vs " + std::to_string(z_u_.size()) + ")");
  }
  require_finite(z_u_, "z_u");
  require_finite(z_d_prime_, "z_d'");
  require_finite(z_d_, "z_d");
}

std::vector<float> pseudo_linear_sum(std::span<const float> x_u, std::span<const float> x_d,
                                     float alpha) {
  if (x_u.size() != x_d.size()) throw ContractError("x_u and x_d differ in size");
  std::vector<float> out(x_u.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x_u[i] + alpha * x_d[i];
  return out;
}

Decomposition::Decomposition(Image x_u, Image x_d, double alpha)
    : x_u_(std::move(x_u)), x_d_(std::move(x_d)), alpha_(alpha) {
  if (!(alpha_ >= 0.0) || !std::isfinite(alpha_)) {
    throw ContractError("alpha must be finite and nonnegative");
  }
  if (x_u_.shape() != x_d_.shape()) throw ContractError("x_u and x_d shapes differ");
  x_prime_ = Image(x_u_.shape(),
                   pseudo_linear_sum(x_u_.values(), x_d_.values(), static_cast<float>(alpha_)));
}

}  // namespace plseada
