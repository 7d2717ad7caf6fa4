#pragma once

#include <vector>

#include "plseada/nets/layers.hpp"

namespace plseada::nets {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adaptive-moment optimizer over a fixed parameter set. Only the
/// parameters it was constructed with are ever modified by step().
template <typename T>
class Adam {
 public:
  Adam(std::vector<Parameter<T>*> params, AdamConfig config = {});

  void step();
  void zero_grad();
  std::size_t steps_taken() const noexcept { return t_; }
  /// L2 norm of the current gradients.
  double grad_norm() const;

 private:
  std::vector<Parameter<T>*> params_;
  std::vector<std::vector<T>> m_, v_;
  AdamConfig config_;
  std::size_t t_ = 0;
};

}  // namespace plseada::nets
