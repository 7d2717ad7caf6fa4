#pragma once

#include <span>

#include "plseada/nets/tensor.hpp"

namespace plseada::harmonizers {

using nets::Tensor;

/// Mean squared error over all elements. When `grad` is non-null it
/// receives dL/dx_prime.
template <typename T>
double recon_loss(const Tensor<T>& x, const Tensor<T>& x_prime, Tensor<T>* grad = nullptr);

/// Mean softmax cross-entropy of (N, K) logits against labels in [0, K).
template <typename T>
double domain_loss(const Tensor<T>& logits, std::span<const int> labels, Tensor<T>* grad = nullptr);

/// Mean cross-entropy between softmax(logits) and the uniform distribution
/// over K classes: logsumexp(l) - mean(l). Minimum ln K at uniform softmax.
template <typename T>
double confusion_loss(const Tensor<T>& logits, Tensor<T>* grad = nullptr);

/// Domain cross-entropy with z_d' read directly as domain logits. Requires
/// d_s == num_domains; otherwise raises ConfigError.
template <typename T>
double style_supervision_loss(const Tensor<T>& z_d_prime, std::span<const int> labels,
                              int num_domains, Tensor<T>* grad = nullptr);

// Single-vector forms.
double domain_loss(std::span<const double> logits, int label);
double confusion_loss(std::span<const double> logits);
std::vector<double> softmax(std::span<const double> logits);

}  // namespace plseada::harmonizers
