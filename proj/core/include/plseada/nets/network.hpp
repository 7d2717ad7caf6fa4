#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "plseada/core/image.hpp"
#include "plseada/core/latent.hpp"
#include "plseada/nets/layers.hpp"

namespace plseada::nets {

enum class Activation { LeakyReLU, ReLU, Tanh };

/// Topology of the four components. Encoders are a 3x3 stem followed by one
/// stride-2 stage per extra channel entry, then a linear head; the decoder
/// mirrors this with transposed convolutions and a final 3x3 projection.
struct NetworkConfig {
  std::size_t d_u = 175;
  std::size_t d_s = 2;
  int num_domains = 2;
  std::vector<std::size_t> encoder_channels{8, 8, 16, 32, 32};
  std::vector<std::size_t> style_channels{4, 8, 8, 16, 16};
  std::vector<std::size_t> decoder_channels{32, 32, 16, 8, 8};
  /// Convolutions per resolution stage; stages beyond the first add 3x3 stride-1 convs.
  std::size_t convs_per_stage = 1;
  std::size_t predictor_hidden = 32;
  Activation activation = Activation::LeakyReLU;
  double leaky_slope = 0.2;
  Shape image_shape{1, 64, 64};

  /// 14-layer encoders/decoder on (1, 80, 112, 80) volumes.
  static NetworkConfig deep_profile();

  /// Throws ConfigError on inconsistent dimensions.
  void validate() const;
  std::size_t downsampling_stages() const { return encoder_channels.size() - 1; }
  Shape bottleneck_shape() const;
};

nlohmann::json to_json(const NetworkConfig& config);
NetworkConfig network_config_from_json(const nlohmann::json& doc);

/// Which of the compared models a bundle belongs to.
enum class ModelKind { Cae, Ada, SeAda, PlSeAda };
using plseada::to_string;
std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);
bool uses_style_encoder(ModelKind kind);

template <typename T>
Sequential<T> build_encoder(const NetworkConfig& config, const std::vector<std::size_t>& channels,
                            std::size_t out_dim);
template <typename T>
Sequential<T> build_decoder(const NetworkConfig& config);
template <typename T>
Sequential<T> build_predictor(const NetworkConfig& config);

/// z_d = W z_d' + b for a single vector, W stored (d_u, d_s) row-major.
template <typename T>
std::vector<T> affine_expand(const Tensor<T>& weight, std::span<const T> bias,
                             std::span<const T> z_d_prime);

/// f_E, f_SE + affine expansion, shared decoder f_D, domain predictor g_D.
/// Exactly one decoder parameter set exists per bundle.
class ModelBundle {
 public:
  static constexpr const char* kVersion = "plseada-bundle/1";

  ModelBundle(NetworkConfig config, ModelKind kind);
  static ModelBundle create(const NetworkConfig& config, ModelKind kind, std::uint64_t seed);

  const NetworkConfig& config() const noexcept { return config_; }
  ModelKind kind() const noexcept { return kind_; }
  bool has_style() const noexcept { return style_encoder_.has_value(); }

  Sequential<float>& encoder() { return encoder_; }
  Sequential<float>& decoder() { return decoder_; }
  Sequential<float>& predictor() { return predictor_; }
  Sequential<float>& style_encoder();
  Sequential<float>& affine();
  const Sequential<float>& encoder() const { return encoder_; }
  const Sequential<float>& decoder() const { return decoder_; }
  const Sequential<float>& predictor() const { return predictor_; }
  const Sequential<float>& style_encoder() const;
  const Sequential<float>& affine() const;
  Linear<float>& affine_layer();

  // Pure batched inference, inputs (N, C, ...) images or (N, d) codes.
  Tensor<float> encode(const Tensor<float>& images) const;
  Tensor<float> style_encode(const Tensor<float>& images) const;
  Tensor<float> expand(const Tensor<float>& z_d_prime) const;
  Tensor<float> decode(const Tensor<float>& codes) const;
  Tensor<float> predict_domain(const Tensor<float>& z_u) const;

  /// Full latent triple for one image; z_d' and z_d are empty without a style encoder.
  LatentCode latent(const Image& image) const;

  /// "f_E.*", "f_SE.*", "affine.*", "f_D.*", "g_D.*".
  std::vector<NamedParameter<float>> named_parameters();
  std::size_t parameter_count() const;

 private:
  NetworkConfig config_;
  ModelKind kind_;
  Sequential<float> encoder_;
  std::optional<Sequential<float>> style_encoder_;
  std::optional<Sequential<float>> affine_;
  Sequential<float> decoder_;
  Sequential<float> predictor_;
};

/// Stacks images into an (N, C, ...) batch. All shapes must match.
Tensor<float> to_batch(std::span<const Image> images);
Image image_from_batch(const Tensor<float>& batch, std::size_t index);

}  // namespace plseada::nets
