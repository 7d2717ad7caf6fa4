#include "plseada/harmonizers/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plseada/core/error.hpp"

namespace plseada::harmonizers {

namespace {

template <typename T>
double log_sum_exp(const T* row, std::size_t k) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) m = std::max(m, static_cast<double>(row[j]));
  double s = 0.0;
  for (std::size_t j = 0; j < k; ++j) s += std::exp(static_cast<double>(row[j]) - m);
  return m + std::log(s);
}

template <typename T>
void check_logits(const Tensor<T>& logits, const char* who) {
  if (logits.rank() != 2 || logits.dim(0) == 0 || logits.dim(1) == 0) {
    throw ContractError(std::string(who) + ": logits must be a nonempty (N, K) tensor, got " +
                        to_string(logits.shape()));
  }
}

}  // namespace

template <typename T>
double recon_loss(const Tensor<T>& x, const Tensor<T>& x_prime, Tensor<T>* grad) {
  if (x.shape() != x_prime.shape()) {
    throw ContractError("recon_loss: shapes differ " + to_string(x.shape()) + " vs " +
                        to_string(x_prime.shape()));
  }
  if (x.empty()) throw EmptyInputError("recon_loss: empty input");
  const double n = static_cast<double>(x.size());
  double sum = 0.0;
  if (grad) *grad = Tensor<T>(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x_prime[i]) - static_cast<double>(x[i]);
    sum += d * d;
    if (grad) (*grad)[i] = static_cast<T>(2.0 * d / n);
  }
  return sum / n;
}

template <typename T>
double domain_loss(const Tensor<T>& logits, std::span<const int> labels, Tensor<T>* grad) {
  check_logits(logits, "domain_loss");
  const auto n = logits.dim(0);
  const auto k = logits.dim(1);
  if (labels.size() != n) throw ContractError("domain_loss: one label per row required");
  if (grad) *grad = Tensor<T>(logits.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw ContractError("domain_loss: label " + std::to_string(label) + " outside [0, " +
                          std::to_string(k) + ")");
    }
    const T* row = logits.data() + i * k;
    const double lse = log_sum_exp(row, k);
    total += lse - static_cast<double>(row[label]);
    if (grad) {
      for (std::size_t j = 0; j < k; ++j) {
        double p = std::exp(static_cast<double>(row[j]) - lse);
        (*grad)[i * k + j] = static_cast<T>((p - (static_cast<int>(j) == label ? 1.0 : 0.0)) /
                                            static_cast<double>(n));
      }
    }
  }
  return total / static_cast<double>(n);
}

template <typename T>
double confusion_loss(const Tensor<T>& logits, Tensor<T>* grad) {
  check_logits(logits, "confusion_loss");
  const auto n = logits.dim(0);
  const auto k = logits.dim(1);
  const double inv_k = 1.0 / static_cast<double>(k);
  if (grad) *grad = Tensor<T>(logits.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = logits.data() + i * k;
    const double lse = log_sum_exp(row, k);
    double mean = 0.0;
    for (std::size_t j = 0; j < k; ++j) mean += static_cast<double>(row[j]);
    total += lse - mean * inv_k;
    if (grad) {
      for (std::size_t j = 0; j < k; ++j) {
        double p = std::exp(static_cast<double>(row[j]) - lse);
        (*grad)[i * k + j] = static_cast<T>((p - inv_k) / static_cast<double>(n));
      }
    }
  }
  return total / static_cast<double>(n);
}

template <typename T>
double style_supervision_loss(const Tensor<T>& z_d_prime, std::span<const int> labels,
                              int num_domains, Tensor<T>* grad) {
  if (z_d_prime.rank() != 2 || z_d_prime.dim(1) != static_cast<std::size_t>(num_domains)) {
    throw ConfigError("style supervision reads z_d' as domain logits, so d_s must equal the number "
                      "of domains (" + std::to_string(num_domains) + "); got z_d' of shape " +
                      to_string(z_d_prime.shape()) +
                      ". Set d_s = K or attach a separate classification head to z_d'.");
  }
  return domain_loss(z_d_prime, labels, grad);
}

double domain_loss(std::span<const double> logits, int label) {
  Tensor<double> t({1, logits.size()}, std::vector<double>(logits.begin(), logits.end()));
  return domain_loss(t, std::span<const int>(&label, 1));
}

double confusion_loss(std::span<const double> logits) {
  Tensor<double> t({1, logits.size()}, std::vector<double>(logits.begin(), logits.end()));
  return confusion_loss(t);
}

std::vector<double> softmax(std::span<const double> logits) {
  const double lse = log_sum_exp(logits.data(), logits.size());
  std::vector<double> p(logits.size());
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = std::exp(logits[j] - lse);
  return p;
}

template double recon_loss<float>(const Tensor<float>&, const Tensor<float>&, Tensor<float>*);
template double recon_loss<double>(const Tensor<double>&, const Tensor<double>&, Tensor<double>*);
template double domain_loss<float>(const Tensor<float>&, std::span<const int>, Tensor<float>*);
template double domain_loss<double>(const Tensor<double>&, std::span<const int>, Tensor<double>*);
template double confusion_loss<float>(const Tensor<float>&, Tensor<float>*);
template double confusion_loss<double>(const Tensor<double>&, Tensor<double>*);
template double style_supervision_loss<float>(const Tensor<float>&, std::span<const int>, int, Tensor<float>*);
template double style_supervision_loss<double>(const Tensor<double>&, std::span<const int>, int, Tensor<double>*);

}  // namespace plseada::harmonizers
