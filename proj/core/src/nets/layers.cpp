#include "plseada/nets/layers.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Core>

namespace plseada::nets {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using ConstVectorMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

using Extents = std::array<std::size_t, 3>;

std::size_t volume(const Extents& e) { return e[0] * e[1] * e[2]; }

Extents spatial_extents(const Shape& shape, std::size_t rank) {
  if (rank == 2) return {1, shape[2], shape[3]};
  return {shape[2], shape[3], shape[4]};
}

Shape batch_shape(std::size_t n, std::size_t c, const Extents& e, std::size_t rank) {
  if (rank == 2) return {n, c, e[1], e[2]};
  return {n, c, e[0], e[1], e[2]};
}

/// Unfolds receptive fields of a (C, D, H, W) volume into a
/// (C * kd * kh * kw) x (Do * Ho * Wo) matrix.
template <typename T>
void im2col(const T* in, std::size_t channels, const Extents& in_ext, const ConvGeometry& g,
            const Extents& out_ext, T* col) {
  const auto P = volume(out_ext);
  std::size_t row = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    const T* plane = in + c * volume(in_ext);
    for (std::size_t kd = 0; kd < g.kernel[0]; ++kd) {
      for (std::size_t kh = 0; kh < g.kernel[1]; ++kh) {
        for (std::size_t kw = 0; kw < g.kernel[2]; ++kw, ++row) {
          T* dst = col + row * P;
          for (std::size_t od = 0; od < out_ext[0]; ++od) {
            const auto id = static_cast<std::ptrdiff_t>(od * g.stride[0] + kd) -
                            static_cast<std::ptrdiff_t>(g.pad[0]);
            const bool d_ok = id >= 0 && id < static_cast<std::ptrdiff_t>(in_ext[0]);
            for (std::size_t oh = 0; oh < out_ext[1]; ++oh) {
              const auto ih = static_cast<std::ptrdiff_t>(oh * g.stride[1] + kh) -
                              static_cast<std::ptrdiff_t>(g.pad[1]);
              const bool h_ok = d_ok && ih >= 0 && ih < static_cast<std::ptrdiff_t>(in_ext[1]);
              const T* src = h_ok ? plane + (static_cast<std::size_t>(id) * in_ext[1] +
                                             static_cast<std::size_t>(ih)) * in_ext[2]
                                  : nullptr;
              for (std::size_t ow = 0; ow < out_ext[2]; ++ow) {
                const auto iw = static_cast<std::ptrdiff_t>(ow * g.stride[2] + kw) -
                                static_cast<std::ptrdiff_t>(g.pad[2]);
                *dst++ = (h_ok && iw >= 0 && iw < static_cast<std::ptrdiff_t>(in_ext[2]))
                             ? src[iw]
                             : T(0);
              }
            }
          }
        }
      }
    }
  }
}

/// Adjoint of im2col: scatters-and-adds columns back into the volume.
template <typename T>
void col2im(const T* col, std::size_t channels, const Extents& in_ext, const ConvGeometry& g,
            const Extents& out_ext, T* in) {
  const auto P = volume(out_ext);
  std::size_t row = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    T* plane = in + c * volume(in_ext);
    for (std::size_t kd = 0; kd < g.kernel[0]; ++kd) {
      for (std::size_t kh = 0; kh < g.kernel[1]; ++kh) {
        for (std::size_t kw = 0; kw < g.kernel[2]; ++kw, ++row) {
          const T* src = col + row * P;
          for (std::size_t od = 0; od < out_ext[0]; ++od) {
            const auto id = static_cast<std::ptrdiff_t>(od * g.stride[0] + kd) -
                            static_cast<std::ptrdiff_t>(g.pad[0]);
            const bool d_ok = id >= 0 && id < static_cast<std::ptrdiff_t>(in_ext[0]);
            for (std::size_t oh = 0; oh < out_ext[1]; ++oh) {
              const auto ih = static_cast<std::ptrdiff_t>(oh * g.stride[1] + kh) -
                              static_cast<std::ptrdiff_t>(g.pad[1]);
              const bool h_ok = d_ok && ih >= 0 && ih < static_cast<std::ptrdiff_t>(in_ext[1]);
              if (!h_ok) {
                src += out_ext[2];
                continue;
              }
              T* dst = plane + (static_cast<std::size_t>(id) * in_ext[1] +
                                static_cast<std::size_t>(ih)) * in_ext[2];
              for (std::size_t ow = 0; ow < out_ext[2]; ++ow, ++src) {
                const auto iw = static_cast<std::ptrdiff_t>(ow * g.stride[2] + kw) -
                                static_cast<std::ptrdiff_t>(g.pad[2]);
                if (iw >= 0 && iw < static_cast<std::ptrdiff_t>(in_ext[2])) dst[iw] += *src;
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void uniform_fill(Tensor<T>& t, T bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-static_cast<double>(bound), static_cast<double>(bound));
  for (auto& v : t.values()) v = static_cast<T>(dist(rng));
}

/// He-style fan-in scaling for rectifier networks.
template <typename T>
T fan_in_bound(std::size_t fan_in) {
  return static_cast<T>(std::sqrt(6.0 / static_cast<double>(fan_in)));
}

void check_input(const Shape& shape, std::size_t rank, std::size_t channels, const char* who) {
  if (shape.size() != rank + 2 || shape[1] != channels) {
    throw ContractError(std::string(who) + ": expected input (N, " + std::to_string(channels) +
                        (rank == 2 ? ", H, W)" : ", D, H, W)") + ", got " + to_string(shape));
  }
}

}  // namespace

// ---------------------------------------------------------------- Linear

template <typename T>
Linear<T>::Linear(std::size_t in_features, std::size_t out_features)
    : in_(in_features),
      out_(out_features),
      weight_("weight", {out_features, in_features}),
      bias_("bias", {out_features}) {
  if (in_ == 0 || out_ == 0) throw ContractError("Linear: feature counts must be positive");
}

template <typename T>
Tensor<T> Linear<T>::apply(const Tensor<T>& x) const {
  if (x.rank() != 2 || x.dim(1) != in_) {
    throw ContractError("Linear: expected input (N, " + std::to_string(in_) + "), got " +
                        to_string(x.shape()));
  }
  const auto n = x.dim(0);
  Tensor<T> y({n, out_});
  ConstMatrixMap<T> X(x.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(in_));
  ConstMatrixMap<T> W(weight_.value.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
  ConstVectorMap<T> b(bias_.value.data(), static_cast<Eigen::Index>(out_));
  MatrixMap<T> Y(y.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out_));
  Y.noalias() = X * W.transpose();
  Y.rowwise() += b.transpose();
  return y;
}

template <typename T>
Tensor<T> Linear<T>::backward(const Tensor<T>& grad_out) {
  const auto n = static_cast<Eigen::Index>(this->input_.dim(0));
  const auto in = static_cast<Eigen::Index>(in_);
  const auto out = static_cast<Eigen::Index>(out_);
  if (grad_out.shape() != Shape{this->input_.dim(0), out_}) {
    throw ContractError("Linear::backward: gradient shape mismatch");
  }
  ConstMatrixMap<T> X(this->input_.data(), n, in);
  ConstMatrixMap<T> G(grad_out.data(), n, out);
  ConstMatrixMap<T> W(weight_.value.data(), out, in);
  MatrixMap<T> dW(weight_.grad.data(), out, in);
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> db(bias_.grad.data(), out);
  dW.noalias() += G.transpose() * X;
  db.noalias() += G.colwise().sum().transpose();
  Tensor<T> dx(this->input_.shape());
  MatrixMap<T> dX(dx.data(), n, in);
  dX.noalias() = G * W;
  return dx;
}

template <typename T>
void Linear<T>::init_parameters(Rng& rng) {
  uniform_fill(weight_.value, fan_in_bound<T>(in_), rng);
  bias_.value.fill(T(0));
}

template <typename T>
std::string Linear<T>::describe() const {
  return "Linear(" + std::to_string(in_) + " -> " + std::to_string(out_) + ")";
}

// ---------------------------------------------------------------- geometry

ConvGeometry ConvGeometry::make(std::size_t rank, std::size_t kernel, std::size_t stride,
                                std::size_t pad) {
  if (rank != 2 && rank != 3) throw ContractError("convolutions support 2 or 3 spatial axes");
  if (kernel == 0 || stride == 0) throw ContractError("kernel and stride must be positive");
  ConvGeometry g;
  g.rank = rank;
  g.kernel = {rank == 3 ? kernel : 1, kernel, kernel};
  g.stride = {rank == 3 ? stride : 1, stride, stride};
  g.pad = {rank == 3 ? pad : 0, pad, pad};
  return g;
}

std::array<std::size_t, 3> ConvGeometry::conv_output(const std::array<std::size_t, 3>& in) const {
  std::array<std::size_t, 3> out{};
  for (std::size_t a = 0; a < 3; ++a) {
    const auto padded = in[a] + 2 * pad[a];
    if (padded < kernel[a]) throw ContractError("convolution kernel larger than padded input");
    out[a] = (padded - kernel[a]) / stride[a] + 1;
  }
  return out;
}

std::array<std::size_t, 3> ConvGeometry::transposed_output(const std::array<std::size_t, 3>& in) const {
  std::array<std::size_t, 3> out{};
  for (std::size_t a = 0; a < 3; ++a) {
    const auto full = (in[a] - 1) * stride[a] + kernel[a];
    if (full < 2 * pad[a] + 1) throw ContractError("transposed convolution output would be empty");
    out[a] = full - 2 * pad[a];
  }
  return out;
}

// ---------------------------------------------------------------- Conv

template <typename T>
Conv<T>::Conv(std::size_t in_channels, std::size_t out_channels, ConvGeometry geometry)
    : in_ch_(in_channels),
      out_ch_(out_channels),
      geo_(geometry),
      weight_("weight", {out_channels, in_channels * geometry.kernel_volume()}),
      bias_("bias", {out_channels}) {}

template <typename T>
Tensor<T> Conv<T>::apply(const Tensor<T>& x) const {
  check_input(x.shape(), geo_.rank, in_ch_, "Conv");
  const auto n = x.dim(0);
  const auto in_ext = spatial_extents(x.shape(), geo_.rank);
  const auto out_ext = geo_.conv_output(in_ext);
  const auto rows = in_ch_ * geo_.kernel_volume();
  const auto P = volume(out_ext);
  Tensor<T> y(batch_shape(n, out_ch_, out_ext, geo_.rank));
  AlignedVector<T> col(rows * P);
  ConstMatrixMap<T> W(weight_.value.data(), static_cast<Eigen::Index>(out_ch_), static_cast<Eigen::Index>(rows));
  ConstVectorMap<T> b(bias_.value.data(), static_cast<Eigen::Index>(out_ch_));
  ConstMatrixMap<T> C(col.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(P));
  for (std::size_t i = 0; i < n; ++i) {
    im2col(x.data() + i * in_ch_ * volume(in_ext), in_ch_, in_ext, geo_, out_ext, col.data());
    MatrixMap<T> Y(y.data() + i * out_ch_ * P, static_cast<Eigen::Index>(out_ch_), static_cast<Eigen::Index>(P));
    Y.noalias() = W * C;
    Y.colwise() += b;
  }
  return y;
}

template <typename T>
Tensor<T> Conv<T>::backward(const Tensor<T>& grad_out) {
  const auto& x = this->input_;
  const auto n = x.dim(0);
  const auto in_ext = spatial_extents(x.shape(), geo_.rank);
  const auto out_ext = geo_.conv_output(in_ext);
  if (grad_out.shape() != batch_shape(n, out_ch_, out_ext, geo_.rank)) {
    throw ContractError("Conv::backward: gradient shape mismatch");
  }
  const auto rows = static_cast<Eigen::Index>(in_ch_ * geo_.kernel_volume());
  const auto P = static_cast<Eigen::Index>(volume(out_ext));
  const auto cout = static_cast<Eigen::Index>(out_ch_);
  AlignedVector<T> col(static_cast<std::size_t>(rows * P));
  AlignedVector<T> dcol(col.size());
  ConstMatrixMap<T> W(weight_.value.data(), cout, rows);
  MatrixMap<T> dW(weight_.grad.data(), cout, rows);
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> db(bias_.grad.data(), cout);
  MatrixMap<T> C(col.data(), rows, P);
  MatrixMap<T> dC(dcol.data(), rows, P);
  Tensor<T> dx(x.shape());
  for (std::size_t i = 0; i < n; ++i) {
    im2col(x.data() + i * in_ch_ * volume(in_ext), in_ch_, in_ext, geo_, out_ext, col.data());
    ConstMatrixMap<T> G(grad_out.data() + i * out_ch_ * static_cast<std::size_t>(P), cout, P);
    dW.noalias() += G * C.transpose();
    db.noalias() += G.rowwise().sum();
    dC.noalias() = W.transpose() * G;
    col2im(dcol.data(), in_ch_, in_ext, geo_, out_ext, dx.data() + i * in_ch_ * volume(in_ext));
  }
  return dx;
}

template <typename T>
void Conv<T>::init_parameters(Rng& rng) {
  uniform_fill(weight_.value, fan_in_bound<T>(in_ch_ * geo_.kernel_volume()), rng);
  bias_.value.fill(T(0));
}

template <typename T>
std::string Conv<T>::describe() const {
  std::ostringstream os;
  os << "Conv" << geo_.rank << "d(" << in_ch_ << " -> " << out_ch_ << ", k" << geo_.kernel[2]
     << " s" << geo_.stride[2] << " p" << geo_.pad[2] << ")";
  return os.str();
}

// ---------------------------------------------------------------- ConvTranspose

template <typename T>
ConvTranspose<T>::ConvTranspose(std::size_t in_channels, std::size_t out_channels,
                                ConvGeometry geometry)
    : in_ch_(in_channels),
      out_ch_(out_channels),
      geo_(geometry),
      weight_("weight", {in_channels, out_channels * geometry.kernel_volume()}),
      bias_("bias", {out_channels}) {}

template <typename T>
Tensor<T> ConvTranspose<T>::apply(const Tensor<T>& x) const {
  check_input(x.shape(), geo_.rank, in_ch_, "ConvTranspose");
  const auto n = x.dim(0);
  const auto small = spatial_extents(x.shape(), geo_.rank);
  const auto big = geo_.transposed_output(small);
  const auto rows = static_cast<Eigen::Index>(out_ch_ * geo_.kernel_volume());
  const auto Ps = static_cast<Eigen::Index>(volume(small));
  const auto cin = static_cast<Eigen::Index>(in_ch_);
  Tensor<T> y(batch_shape(n, out_ch_, big, geo_.rank));
  AlignedVector<T> col(static_cast<std::size_t>(rows * Ps));
  ConstMatrixMap<T> W(weight_.value.data(), cin, rows);
  MatrixMap<T> C(col.data(), rows, Ps);
  const auto big_vol = volume(big);
  for (std::size_t i = 0; i < n; ++i) {
    ConstMatrixMap<T> X(x.data() + i * in_ch_ * static_cast<std::size_t>(Ps), cin, Ps);
    C.noalias() = W.transpose() * X;
    T* yi = y.data() + i * out_ch_ * big_vol;
    col2im(col.data(), out_ch_, big, geo_, small, yi);
    for (std::size_t c = 0; c < out_ch_; ++c) {
      const T bc = bias_.value[c];
      for (std::size_t p = 0; p < big_vol; ++p) yi[c * big_vol + p] += bc;
    }
  }
  return y;
}

template <typename T>
Tensor<T> ConvTranspose<T>::backward(const Tensor<T>& grad_out) {
  const auto& x = this->input_;
  const auto n = x.dim(0);
  const auto small = spatial_extents(x.shape(), geo_.rank);
  const auto big = geo_.transposed_output(small);
  if (grad_out.shape() != batch_shape(n, out_ch_, big, geo_.rank)) {
    throw ContractError("ConvTranspose::backward: gradient shape mismatch");
  }
  const auto rows = static_cast<Eigen::Index>(out_ch_ * geo_.kernel_volume());
  const auto Ps = static_cast<Eigen::Index>(volume(small));
  const auto cin = static_cast<Eigen::Index>(in_ch_);
  const auto big_vol = volume(big);
  AlignedVector<T> dcol(static_cast<std::size_t>(rows * Ps));
  ConstMatrixMap<T> W(weight_.value.data(), cin, rows);
  MatrixMap<T> dW(weight_.grad.data(), cin, rows);
  MatrixMap<T> dC(dcol.data(), rows, Ps);
  Tensor<T> dx(x.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const T* gi = grad_out.data() + i * out_ch_ * big_vol;
    im2col(gi, out_ch_, big, geo_, small, dcol.data());
    ConstMatrixMap<T> X(x.data() + i * in_ch_ * static_cast<std::size_t>(Ps), cin, Ps);
    MatrixMap<T> dX(dx.data() + i * in_ch_ * static_cast<std::size_t>(Ps), cin, Ps);
    dX.noalias() = W * dC;
    dW.noalias() += X * dC.transpose();
    for (std::size_t c = 0; c < out_ch_; ++c) {
      T sum = T(0);
      for (std::size_t p = 0; p < big_vol; ++p) sum += gi[c * big_vol + p];
      bias_.grad[c] += sum;
    }
  }
  return dx;
}

template <typename T>
void ConvTranspose<T>::init_parameters(Rng& rng) {
  // Each output pixel receives about in_ch * kvol / stride^rank contributions.
  std::size_t stride_vol = geo_.stride[0] * geo_.stride[1] * geo_.stride[2];
  std::size_t fan_in = std::max<std::size_t>(1, in_ch_ * geo_.kernel_volume() / stride_vol);
  uniform_fill(weight_.value, fan_in_bound<T>(fan_in), rng);
  bias_.value.fill(T(0));
}

template <typename T>
std::string ConvTranspose<T>::describe() const {
  std::ostringstream os;
  os << "ConvTranspose" << geo_.rank << "d(" << in_ch_ << " -> " << out_ch_ << ", k"
     << geo_.kernel[2] << " s" << geo_.stride[2] << " p" << geo_.pad[2] << ")";
  return os.str();
}

// ---------------------------------------------------------------- activations

template <typename T>
Tensor<T> LeakyReLU<T>::apply(const Tensor<T>& x) const {
  Tensor<T> y = x;
  for (auto& v : y.values()) v = v > T(0) ? v : slope_ * v;
  return y;
}

template <typename T>
Tensor<T> LeakyReLU<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> dx = grad_out;
  const auto& x = this->input_;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(x[i] > T(0))) dx[i] *= slope_;
  }
  return dx;
}

template <typename T>
std::string LeakyReLU<T>::describe() const {
  return slope_ == T(0) ? "ReLU" : "LeakyReLU(" + std::to_string(static_cast<double>(slope_)) + ")";
}

template <typename T>
Tensor<T> Tanh<T>::apply(const Tensor<T>& x) const {
  Tensor<T> y = x;
  for (auto& v : y.values()) v = std::tanh(v);
  return y;
}

template <typename T>
Tensor<T> Tanh<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> dx = grad_out;
  const auto& x = this->input_;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const T t = std::tanh(x[i]);
    dx[i] *= T(1) - t * t;
  }
  return dx;
}

// ---------------------------------------------------------------- Reshape

template <typename T>
Tensor<T> Reshape<T>::apply(const Tensor<T>& x) const {
  Shape s{x.dim(0)};
  s.insert(s.end(), item_shape_.begin(), item_shape_.end());
  return x.reshaped(std::move(s));
}

template <typename T>
Tensor<T> Reshape<T>::backward(const Tensor<T>& grad_out) {
  return grad_out.reshaped(this->input_.shape());
}

template <typename T>
std::string Reshape<T>::describe() const {
  return "Reshape" + to_string(item_shape_);
}

// ---------------------------------------------------------------- Sequential

template <typename T>
Sequential<T>::Sequential(const Sequential& other) {
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

template <typename T>
Sequential<T>& Sequential<T>::operator=(const Sequential& other) {
  if (this != &other) {
    Sequential copy(other);
    layers_ = std::move(copy.layers_);
  }
  return *this;
}

template <typename T>
Tensor<T> Sequential<T>::apply(const Tensor<T>& x) const {
  Tensor<T> h = x;
  for (const auto& l : layers_) h = l->apply(h);
  return h;
}

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& x) {
  Tensor<T> h = x;
  for (auto& l : layers_) h = l->forward(h);
  return h;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

template <typename T>
void Sequential<T>::init_parameters(Rng& rng) {
  for (auto& l : layers_) l->init_parameters(rng);
}

template <typename T>
void Sequential<T>::zero_grad() {
  for (auto& l : layers_) l->zero_grad();
}

template <typename T>
std::vector<NamedParameter<T>> Sequential<T>::named_parameters() {
  std::vector<NamedParameter<T>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto* p : layers_[i]->parameters()) out.push_back({std::to_string(i) + "." + p->name, p});
  }
  return out;
}

template <typename T>
std::vector<Parameter<T>*> Sequential<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& l : layers_) {
    for (auto* p : l->parameters()) out.push_back(p);
  }
  return out;
}

template <typename T>
std::size_t Sequential<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) {
    for (const auto* p : std::as_const(*l).parameters()) n += p->value.size();
  }
  return n;
}

template <typename T>
std::string Sequential<T>::describe() const {
  std::string out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (i) out += " -> ";
    out += layers_[i]->describe();
  }
  return out;
}

template class Linear<float>;
template class Linear<double>;
template class Conv<float>;
template class Conv<double>;
template class ConvTranspose<float>;
template class ConvTranspose<double>;
template class LeakyReLU<float>;
template class LeakyReLU<double>;
template class Tanh<float>;
template class Tanh<double>;
template class Reshape<float>;
template class Reshape<double>;
template class Sequential<float>;
template class Sequential<double>;

}  // namespace plseada::nets
