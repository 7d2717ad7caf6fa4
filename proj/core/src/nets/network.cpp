#include "plseada/nets/network.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "plseada/core/error.hpp"

namespace plseada::nets {

using nlohmann::json;

namespace {

template <typename T>
void add_activation(Sequential<T>& net, const NetworkConfig& config) {
  switch (config.activation) {
    case Activation::LeakyReLU: net.template add<LeakyReLU<T>>(static_cast<T>(config.leaky_slope)); break;
    case Activation::ReLU: net.template add<LeakyReLU<T>>(T(0)); break;
    case Activation::Tanh: net.template add<Tanh<T>>(); break;
  }
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::LeakyReLU: return "leaky_relu";
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "?";
}

Activation parse_activation(const std::string& s) {
  if (s == "leaky_relu") return Activation::LeakyReLU;
  if (s == "relu") return Activation::ReLU;
  if (s == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + s + "'");
}

std::size_t spatial_rank(const NetworkConfig& c) { return c.image_shape.size() - 1; }

}  // namespace

NetworkConfig NetworkConfig::deep_profile() {
  NetworkConfig c;
  c.encoder_channels = {16, 32, 64, 128, 128};
  c.style_channels = {16, 32, 64, 128, 128};
  c.decoder_channels = {128, 128, 64, 32, 16};
  c.convs_per_stage = 3;
  c.image_shape = {1, 80, 112, 80};
  return c;
}

void NetworkConfig::validate() const {
  if (d_u == 0) throw ConfigError("d_u must be positive");
  if (d_s == 0) throw ConfigError("d_s must be positive");
  if (num_domains < 2) throw ConfigError("num_domains must be >= 2");
  if (predictor_hidden == 0) throw ConfigError("predictor_hidden must be positive");
  if (convs_per_stage == 0) throw ConfigError("convs_per_stage must be >= 1");
  validate_image_shape(image_shape);
  if (encoder_channels.empty() || decoder_channels.empty() || style_channels.empty()) {
    throw ConfigError("channel lists must be nonempty");
  }
  if (decoder_channels.size() != encoder_channels.size() ||
      style_channels.size() != encoder_channels.size()) {
    throw ConfigError("encoder, style and decoder channel lists must have equal length so the "
                      "decoder output matches the image shape");
  }
  for (auto c : encoder_channels) if (c == 0) throw ConfigError("zero channel count");
  for (auto c : decoder_channels) if (c == 0) throw ConfigError("zero channel count");
  for (auto c : style_channels) if (c == 0) throw ConfigError("zero channel count");
  const std::size_t factor = std::size_t{1} << downsampling_stages();
  for (std::size_t a = 1; a < image_shape.size(); ++a) {
    if (image_shape[a] % factor != 0) {
      throw ConfigError("image extent " + std::to_string(image_shape[a]) + " is not divisible by " +
                        std::to_string(factor) + " (2^stages)");
    }
  }
}

Shape NetworkConfig::bottleneck_shape() const {
  const std::size_t factor = std::size_t{1} << downsampling_stages();
  Shape s{decoder_channels.front()};
  for (std::size_t a = 1; a < image_shape.size(); ++a) s.push_back(image_shape[a] / factor);
  return s;
}

json to_json(const NetworkConfig& c) {
  return {{"d_u", c.d_u},
          {"d_s", c.d_s},
          {"num_domains", c.num_domains},
          {"encoder_channels", c.encoder_channels},
          {"style_channels", c.style_channels},
          {"decoder_channels", c.decoder_channels},
          {"convs_per_stage", c.convs_per_stage},
          {"predictor_hidden", c.predictor_hidden},
          {"activation", std::string(activation_name(c.activation))},
          {"leaky_slope", c.leaky_slope},
          {"image_shape", c.image_shape}};
}

NetworkConfig network_config_from_json(const json& doc) {
  static const std::set<std::string> known = {
      "d_u", "d_s", "num_domains", "encoder_channels", "style_channels", "decoder_channels",
      "convs_per_stage", "predictor_hidden", "activation", "leaky_slope", "image_shape", "profile"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) throw ConfigError("unknown key in model config: '" + key + "'");
  }
  NetworkConfig c;
  if (doc.value("profile", std::string("desk")) == "deep") c = NetworkConfig::deep_profile();
  try {
    c.d_u = doc.value("d_u", c.d_u);
    c.d_s = doc.value("d_s", c.d_s);
    c.num_domains = doc.value("num_domains", c.num_domains);
    c.encoder_channels = doc.value("encoder_channels", c.encoder_channels);
    c.style_channels = doc.value("style_channels", c.style_channels);
    c.decoder_channels = doc.value("decoder_channels", c.decoder_channels);
    c.convs_per_stage = doc.value("convs_per_stage", c.convs_per_stage);
    c.predictor_hidden = doc.value("predictor_hidden", c.predictor_hidden);
    if (doc.contains("activation")) c.activation = parse_activation(doc["activation"].get<std::string>());
    c.leaky_slope = doc.value("leaky_slope", c.leaky_slope);
    c.image_shape = doc.value("image_shape", c.image_shape);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid model config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Cae: return "cae";
    case ModelKind::Ada: return "ada";
    case ModelKind::SeAda: return "se-ada";
    case ModelKind::PlSeAda: return "pl-se-ada";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "cae") return ModelKind::Cae;
  if (name == "ada") return ModelKind::Ada;
  if (name == "se-ada") return ModelKind::SeAda;
  if (name == "pl-se-ada") return ModelKind::PlSeAda;
  throw ConfigError("unknown model '" + std::string(name) +
                    "' (expected cae, ada, se-ada or pl-se-ada)");
}

bool uses_style_encoder(ModelKind kind) {
  return kind == ModelKind::SeAda || kind == ModelKind::PlSeAda;
}

template <typename T>
Sequential<T> build_encoder(const NetworkConfig& config, const std::vector<std::size_t>& channels,
                            std::size_t out_dim) {
  config.validate();
  const auto rank = spatial_rank(config);
  Sequential<T> net;
  net.template add<Conv<T>>(config.image_shape[0], channels[0], ConvGeometry::make(rank, 3, 1, 1));
  add_activation(net, config);
  for (std::size_t i = 1; i < channels.size(); ++i) {
    for (std::size_t k = 1; k < config.convs_per_stage; ++k) {
      net.template add<Conv<T>>(channels[i - 1], channels[i - 1], ConvGeometry::make(rank, 3, 1, 1));
      add_activation(net, config);
    }
    net.template add<Conv<T>>(channels[i - 1], channels[i], ConvGeometry::make(rank, 4, 2, 1));
    add_activation(net, config);
  }
  auto bottleneck = config.bottleneck_shape();
  bottleneck[0] = channels.back();
  const auto flat = element_count(bottleneck);
  net.template add<Reshape<T>>(Shape{flat});
  net.template add<Linear<T>>(flat, out_dim);
  return net;
}

template <typename T>
Sequential<T> build_decoder(const NetworkConfig& config) {
  config.validate();
  const auto rank = spatial_rank(config);
  const auto& channels = config.decoder_channels;
  const auto bottleneck = config.bottleneck_shape();
  Sequential<T> net;
  net.template add<Linear<T>>(config.d_u, element_count(bottleneck));
  net.template add<Reshape<T>>(bottleneck);
  add_activation(net, config);
  for (std::size_t i = 1; i < channels.size(); ++i) {
    for (std::size_t k = 1; k < config.convs_per_stage; ++k) {
      net.template add<Conv<T>>(channels[i - 1], channels[i - 1], ConvGeometry::make(rank, 3, 1, 1));
      add_activation(net, config);
    }
    net.template add<ConvTranspose<T>>(channels[i - 1], channels[i], ConvGeometry::make(rank, 4, 2, 1));
    add_activation(net, config);
  }
  net.template add<Conv<T>>(channels.back(), config.image_shape[0], ConvGeometry::make(rank, 3, 1, 1));
  return net;
}

template <typename T>
Sequential<T> build_predictor(const NetworkConfig& config) {
  Sequential<T> net;
  net.template add<Linear<T>>(config.d_u, config.predictor_hidden);
  add_activation(net, config);
  net.template add<Linear<T>>(config.predictor_hidden, static_cast<std::size_t>(config.num_domains));
  return net;
}

template <typename T>
std::vector<T> affine_expand(const Tensor<T>& weight, std::span<const T> bias,
                             std::span<const T> z_d_prime) {
  if (weight.rank() != 2 || weight.dim(1) != z_d_prime.size() || weight.dim(0) != bias.size()) {
    throw ContractError("affine_expand: W must be (d_u, d_s) with b of length d_u and z_d' of "
                        "length d_s");
  }
  Linear<T> layer(weight.dim(1), weight.dim(0));
  layer.weight().value = weight;
  std::copy(bias.begin(), bias.end(), layer.bias().value.data());
  Tensor<T> z({1, z_d_prime.size()}, std::vector<T>(z_d_prime.begin(), z_d_prime.end()));
  return layer.apply(z).to_vector();
}

template Sequential<float> build_encoder<float>(const NetworkConfig&, const std::vector<std::size_t>&, std::size_t);
template Sequential<double> build_encoder<double>(const NetworkConfig&, const std::vector<std::size_t>&, std::size_t);
template Sequential<float> build_decoder<float>(const NetworkConfig&);
template Sequential<double> build_decoder<double>(const NetworkConfig&);
template Sequential<float> build_predictor<float>(const NetworkConfig&);
template Sequential<double> build_predictor<double>(const NetworkConfig&);
template std::vector<float> affine_expand<float>(const Tensor<float>&, std::span<const float>, std::span<const float>);
template std::vector<double> affine_expand<double>(const Tensor<double>&, std::span<const double>, std::span<const double>);

// ---------------------------------------------------------------- ModelBundle

ModelBundle::ModelBundle(NetworkConfig config, ModelKind kind)
    : config_(std::move(config)),
      kind_(kind),
      encoder_(build_encoder<float>(config_, config_.encoder_channels, config_.d_u)),
      decoder_(build_decoder<float>(config_)),
      predictor_(build_predictor<float>(config_)) {
  if (uses_style_encoder(kind_)) {
    style_encoder_ = build_encoder<float>(config_, config_.style_channels, config_.d_s);
    Sequential<float> affine;
    affine.add<Linear<float>>(config_.d_s, config_.d_u);
    affine_ = std::move(affine);
  }
}

ModelBundle ModelBundle::create(const NetworkConfig& config, ModelKind kind, std::uint64_t seed) {
  ModelBundle bundle(config, kind);
  // Separate streams keep each component's init independent of the others.
  Rng enc(derive_seed(seed, 1)), dec(derive_seed(seed, 2)), pred(derive_seed(seed, 3));
  bundle.encoder_.init_parameters(enc);
  bundle.decoder_.init_parameters(dec);
  bundle.predictor_.init_parameters(pred);
  if (bundle.has_style()) {
    Rng style(derive_seed(seed, 4)), aff(derive_seed(seed, 5));
    bundle.style_encoder_->init_parameters(style);
    bundle.affine_->init_parameters(aff);
  }
  return bundle;
}

Sequential<float>& ModelBundle::style_encoder() {
  if (!style_encoder_) throw ContractError("model '" + std::string(to_string(kind_)) + "' has no style encoder");
  return *style_encoder_;
}
const Sequential<float>& ModelBundle::style_encoder() const {
  return const_cast<ModelBundle*>(this)->style_encoder();
}
Sequential<float>& ModelBundle::affine() {
  if (!affine_) throw ContractError("model '" + std::string(to_string(kind_)) + "' has no affine expansion");
  return *affine_;
}
const Sequential<float>& ModelBundle::affine() const { return const_cast<ModelBundle*>(this)->affine(); }
Linear<float>& ModelBundle::affine_layer() { return static_cast<Linear<float>&>(affine().layer(0)); }

Tensor<float> ModelBundle::encode(const Tensor<float>& images) const {
  Shape expect{images.rank() ? images.dim(0) : 0};
  expect.insert(expect.end(), config_.image_shape.begin(), config_.image_shape.end());
  if (images.shape() != expect) {
    throw ContractError("encode: expected batch of " + to_string(config_.image_shape) +
                        " images, got " + to_string(images.shape()));
  }
  return encoder_.apply(images);
}

Tensor<float> ModelBundle::style_encode(const Tensor<float>& images) const {
  Shape expect{images.rank() ? images.dim(0) : 0};
  expect.insert(expect.end(), config_.image_shape.begin(), config_.image_shape.end());
  if (images.shape() != expect) {
    throw ContractError("style_encode: expected batch of " + to_string(config_.image_shape) + " images");
  }
  return style_encoder().apply(images);
}

Tensor<float> ModelBundle::expand(const Tensor<float>& z_d_prime) const {
  return affine().apply(z_d_prime);
}

Tensor<float> ModelBundle::decode(const Tensor<float>& codes) const {
  if (codes.rank() != 2 || codes.dim(1) != config_.d_u) {
    throw ContractError("decode: expected (N, " + std::to_string(config_.d_u) + ") codes, got " +
                        to_string(codes.shape()));
  }
  return decoder_.apply(codes);
}

Tensor<float> ModelBundle::predict_domain(const Tensor<float>& z_u) const {
  if (z_u.rank() != 2 || z_u.dim(1) != config_.d_u) {
    throw ContractError("predict_domain: expected (N, " + std::to_string(config_.d_u) + ") codes");
  }
  return predictor_.apply(z_u);
}

LatentCode ModelBundle::latent(const Image& image) const {
  const auto batch = to_batch(std::span<const Image>(&image, 1));
  auto z_u = encode(batch).to_vector();
  if (!has_style()) return LatentCode(std::move(z_u), {}, {});
  const auto zdp = style_encode(batch);
  auto z_d = expand(zdp).to_vector();
  return LatentCode(std::move(z_u), zdp.to_vector(), std::move(z_d));
}

std::vector<NamedParameter<float>> ModelBundle::named_parameters() {
  std::vector<NamedParameter<float>> out;
  auto append = [&out](const std::string& prefix, Sequential<float>& net) {
    for (auto& np : net.named_parameters()) out.push_back({prefix + "." + np.path, np.param});
  };
  append("f_E", encoder_);
  if (style_encoder_) append("f_SE", *style_encoder_);
  if (affine_) append("affine", *affine_);
  append("f_D", decoder_);
  append("g_D", predictor_);
  return out;
}

std::size_t ModelBundle::parameter_count() const {
  std::size_t n = encoder_.parameter_count() + decoder_.parameter_count() + predictor_.parameter_count();
  if (style_encoder_) n += style_encoder_->parameter_count() + affine_->parameter_count();
  return n;
}

Tensor<float> to_batch(std::span<const Image> images) {
  if (images.empty()) throw EmptyInputError("to_batch: no images");
  const auto& shape = images.front().shape();
  Shape batch{images.size()};
  batch.insert(batch.end(), shape.begin(), shape.end());
  Tensor<float> out(batch);
  const auto item = element_count(shape);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].shape() != shape) throw ContractError("to_batch: image shapes differ");
    auto v = images[i].values();
    std::copy(v.begin(), v.end(), out.data() + i * item);
  }
  return out;
}

Image image_from_batch(const Tensor<float>& batch, std::size_t index) {
  Shape shape(batch.shape().begin() + 1, batch.shape().end());
  const auto item = element_count(shape);
  std::vector<float> values(batch.data() + index * item, batch.data() + (index + 1) * item);
  return Image(std::move(shape), std::move(values));
}

}  // namespace plseada::nets
