#include "plseada/harmonizers/reconstruct.hpp"

#include "plseada/core/error.hpp"

namespace plseada::harmonizers {

using nets::ModelBundle;
using nets::ModelKind;
using nets::Tensor;

namespace {

Tensor<float> add(const Tensor<float>& a, const Tensor<float>& b) {
  Tensor<float> out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

}  // namespace

LatentReconstruction reconstruct_se_ada(const ModelBundle& bundle, const Image& x) {
  auto latent = bundle.latent(x);
  Tensor<float> z_u({1, latent.z_u().size()}, latent.z_u());
  Tensor<float> z_d({1, latent.z_d().size()}, latent.z_d());
  auto out = bundle.decode(add(z_u, z_d));
  return {nets::image_from_batch(out, 0), std::move(latent)};
}

BatchDecomposition decompose_batch(const ModelBundle& bundle, const Tensor<float>& images) {
  auto z_u = bundle.encode(images);
  auto z_d = bundle.expand(bundle.style_encode(images));
  return {bundle.decode(z_u), bundle.decode(z_d)};
}

Decomposition reconstruct_pl_se_ada(const ModelBundle& bundle, const Image& x, double alpha) {
  if (!(alpha >= 0.0)) throw ContractError("alpha must be nonnegative");
  auto parts = decompose_batch(bundle, nets::to_batch(std::span<const Image>(&x, 1)));
  return Decomposition(nets::image_from_batch(parts.x_u, 0), nets::image_from_batch(parts.x_d, 0), alpha);
}

Tensor<float> reconstruct_batch(const ModelBundle& bundle, const Tensor<float>& images, double alpha) {
  switch (bundle.kind()) {
    case ModelKind::Cae:
    case ModelKind::Ada:
      return bundle.decode(bundle.encode(images));
    case ModelKind::SeAda:
      return bundle.decode(add(bundle.encode(images), bundle.expand(bundle.style_encode(images))));
    case ModelKind::PlSeAda: {
      auto parts = decompose_batch(bundle, images);
      Tensor<float> out(parts.x_u.shape(),
                        pseudo_linear_sum(parts.x_u.values(), parts.x_d.values(), static_cast<float>(alpha)));
      return out;
    }
  }
  throw ContractError("unknown model kind");
}

}  // namespace plseada::harmonizers
