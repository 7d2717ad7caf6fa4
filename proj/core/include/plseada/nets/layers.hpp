#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "plseada/core/random.hpp"
#include "plseada/nets/tensor.hpp"

namespace plseada::nets {

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter(std::string n, Shape shape) : name(std::move(n)), value(shape), grad(std::move(shape)) {}
};

/// A differentiable map. `apply` is pure; `forward` additionally caches the
/// input so that `backward` can return dL/dinput and accumulate parameter
/// gradients (+=). Call zero_grad between optimizer steps.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual Tensor<T> apply(const Tensor<T>& x) const = 0;
  virtual Tensor<T> forward(const Tensor<T>& x) {
    input_ = x;
    return apply(x);
  }
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;

  virtual std::vector<Parameter<T>*> parameters() { return {}; }
  std::vector<const Parameter<T>*> parameters() const {
    auto params = const_cast<Layer*>(this)->parameters();
    return {params.begin(), params.end()};
  }
  virtual void init_parameters(Rng&) {}
  virtual std::unique_ptr<Layer> clone() const = 0;
  virtual std::string describe() const = 0;

  void zero_grad() {
    for (auto* p : parameters()) p->grad.fill(T(0));
  }

 protected:
  Tensor<T> input_;
};

template <typename T>
class Linear final : public Layer<T> {
 public:
  Linear(std::size_t in_features, std::size_t out_features);

  Tensor<T> apply(const Tensor<T>& x) const override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }
  void init_parameters(Rng& rng) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Linear>(*this); }
  std::string describe() const override;

  Parameter<T>& weight() { return weight_; }  // (out, in)
  Parameter<T>& bias() { return bias_; }
  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }

 private:
  std::size_t in_, out_;
  Parameter<T> weight_;
  Parameter<T> bias_;
};

/// Kernel, stride and padding per spatial axis, ordered (depth, height, width).
/// 2D layers use depth extent 1, stride 1, padding 0.
struct ConvGeometry {
  std::size_t rank = 2;
  std::array<std::size_t, 3> kernel{1, 3, 3};
  std::array<std::size_t, 3> stride{1, 1, 1};
  std::array<std::size_t, 3> pad{0, 1, 1};

  static ConvGeometry make(std::size_t rank, std::size_t kernel, std::size_t stride, std::size_t pad);
  std::size_t kernel_volume() const { return kernel[0] * kernel[1] * kernel[2]; }
  /// Output extents of a direct convolution over `in`; throws if the kernel does not fit.
  std::array<std::size_t, 3> conv_output(const std::array<std::size_t, 3>& in) const;
  /// Output extents of the transposed convolution over `in`.
  std::array<std::size_t, 3> transposed_output(const std::array<std::size_t, 3>& in) const;
};

/// Cross-correlation over (N, C, H, W) or (N, C, D, H, W).
template <typename T>
class Conv final : public Layer<T> {
 public:
  Conv(std::size_t in_channels, std::size_t out_channels, ConvGeometry geometry);

  Tensor<T> apply(const Tensor<T>& x) const override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }
  void init_parameters(Rng& rng) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Conv>(*this); }
  std::string describe() const override;

  Parameter<T>& weight() { return weight_; }  // (Cout, Cin, k...)
  Parameter<T>& bias() { return bias_; }

 private:
  std::size_t in_ch_, out_ch_;
  ConvGeometry geo_;
  Parameter<T> weight_;
  Parameter<T> bias_;
};

/// Adjoint of Conv (fractionally strided upsampling). Weight is (Cin, Cout, k...).
template <typename T>
class ConvTranspose final : public Layer<T> {
 public:
  ConvTranspose(std::size_t in_channels, std::size_t out_channels, ConvGeometry geometry);

  Tensor<T> apply(const Tensor<T>& x) const override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }
  void init_parameters(Rng& rng) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<ConvTranspose>(*this); }
  std::string describe() const override;

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }

 private:
  std::size_t in_ch_, out_ch_;
  ConvGeometry geo_;
  Parameter<T> weight_;
  Parameter<T> bias_;
};

/// max(x, slope * x); slope 0 is a plain rectifier.
template <typename T>
class LeakyReLU final : public Layer<T> {
 public:
  explicit LeakyReLU(T slope = T(0.2)) : slope_(slope) {}

  Tensor<T> apply(const Tensor<T>& x) const override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<LeakyReLU>(*this); }
  std::string describe() const override;

 private:
  T slope_;
};

template <typename T>
class Tanh final : public Layer<T> {
 public:
  Tensor<T> apply(const Tensor<T>& x) const override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Tanh>(*this); }
  std::string describe() const override { return "Tanh"; }
};

/// Reshapes each batch item to `item_shape` (used for flatten / unflatten).
template <typename T>
class Reshape final : public Layer<T> {
 public:
  explicit Reshape(Shape item_shape) : item_shape_(std::move(item_shape)) {}

  Tensor<T> apply(const Tensor<T>& x) const override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Reshape>(*this); }
  std::string describe() const override;

 private:
  Shape item_shape_;
};

template <typename T>
struct NamedParameter {
  std::string path;
  Parameter<T>* param;
};

/// Ordered chain of layers with deep-copy semantics.
template <typename T>
class Sequential {
 public:
  Sequential() = default;
  Sequential(const Sequential& other);
  Sequential& operator=(const Sequential& other);
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  template <typename L, typename... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }
  void push_back(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }

  Tensor<T> apply(const Tensor<T>& x) const;
  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& grad_out);

  void init_parameters(Rng& rng);
  void zero_grad();
  /// Parameters named "<layer index>.<weight|bias>".
  std::vector<NamedParameter<T>> named_parameters();
  std::vector<Parameter<T>*> parameters();
  std::size_t parameter_count() const;

  std::size_t size() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_.at(i); }
  const Layer<T>& layer(std::size_t i) const { return *layers_.at(i); }
  std::string describe() const;

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

/// Adapts a Sequential so it can be handed to code expecting a single Layer.
template <typename T>
class SequentialLayer final : public Layer<T> {
 public:
  explicit SequentialLayer(Sequential<T> net) : net_(std::move(net)) {}

  Tensor<T> apply(const Tensor<T>& x) const override { return net_.apply(x); }
  Tensor<T> forward(const Tensor<T>& x) override { return net_.forward(x); }
  Tensor<T> backward(const Tensor<T>& g) override { return net_.backward(g); }
  std::vector<Parameter<T>*> parameters() override { return net_.parameters(); }
  void init_parameters(Rng& rng) override { net_.init_parameters(rng); }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<SequentialLayer>(*this); }
  std::string describe() const override { return net_.describe(); }

  Sequential<T>& net() { return net_; }

 private:
  Sequential<T> net_;
};

}  // namespace plseada::nets
