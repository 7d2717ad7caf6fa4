#pragma once

#include "plseada/core/latent.hpp"
#include "plseada/nets/network.hpp"

namespace plseada::harmonizers {

struct LatentReconstruction {
  Image x_prime;
  LatentCode latent;
};

/// Latent-space combination: x' = f_D(z_u + z_d).
LatentReconstruction reconstruct_se_ada(const nets::ModelBundle& bundle, const Image& x);

/// Image-space combination: x' = f_D(z_u) + alpha * f_D(z_d), one shared decoder.
Decomposition reconstruct_pl_se_ada(const nets::ModelBundle& bundle, const Image& x, double alpha);

/// Batched x_u and x_d for a PL-SE-ADA bundle.
struct BatchDecomposition {
  nets::Tensor<float> x_u;
  nets::Tensor<float> x_d;
};
BatchDecomposition decompose_batch(const nets::ModelBundle& bundle, const nets::Tensor<float>& images);

/// The model's own reconstruction rule: decode(z_u) for CAE/ADA,
/// Eq.-1 style latent sum for SE-ADA, image-space sum for PL-SE-ADA.
nets::Tensor<float> reconstruct_batch(const nets::ModelBundle& bundle,
                                      const nets::Tensor<float>& images, double alpha);

}  // namespace plseada::harmonizers
