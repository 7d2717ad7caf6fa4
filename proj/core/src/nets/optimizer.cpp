#include "plseada/nets/optimizer.hpp"

#include <cmath>

namespace plseada::nets {

template <typename T>
Adam<T>::Adam(std::vector<Parameter<T>*> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (const auto* p : params_) {
    m_.emplace_back(p->value.size(), T(0));
    v_.emplace_back(p->value.size(), T(0));
  }
}

template <typename T>
void Adam<T>::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const T b1 = static_cast<T>(config_.beta1);
  const T b2 = static_cast<T>(config_.beta2);
  const T step = static_cast<T>(config_.lr * std::sqrt(bc2) / bc1);
  const T eps = static_cast<T>(config_.eps * std::sqrt(bc2));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& value = params_[k]->value;
    const auto& grad = params_[k]->grad;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const T g = grad[i];
      m[i] = b1 * m[i] + (T(1) - b1) * g;
      v[i] = b2 * v[i] + (T(1) - b2) * g * g;
      value[i] -= step * m[i] / (std::sqrt(v[i]) + eps);
    }
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto* p : params_) p->grad.fill(T(0));
}

template <typename T>
double Adam<T>::grad_norm() const {
  double sum = 0.0;
  for (const auto* p : params_) {
    for (T g : p->grad.values()) sum += static_cast<double>(g) * static_cast<double>(g);
  }
  return std::sqrt(sum);
}

template class Adam<float>;
template class Adam<double>;

}  // namespace plseada::nets
