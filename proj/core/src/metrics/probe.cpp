#include "plseada/metrics/probe.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "plseada/core/error.hpp"
#include "plseada/core/random.hpp"
#include "plseada/harmonizers/losses.hpp"
#include "plseada/nets/optimizer.hpp"

namespace plseada::metrics {

using nets::Tensor;

Probe::Probe(nets::Sequential<float> net, int num_classes)
    : net_(std::move(net)), num_classes_(num_classes) {}

Tensor<float> Probe::logits(const Tensor<float>& features) const { return net_.apply(features); }

std::vector<int> Probe::predict(const Tensor<float>& features) const {
  const auto out = logits(features);
  const auto k = static_cast<std::size_t>(num_classes_);
  std::vector<int> labels(out.dim(0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const float* row = out.data() + i * k;
    labels[i] = static_cast<int>(std::max_element(row, row + k) - row);
  }
  return labels;
}

Probe train_probe(const Tensor<float>& features, std::span<const int> labels, int num_classes,
                  const ProbeConfig& config) {
  if (features.rank() != 2) throw ContractError("probe features must be (N, d), got " + to_string(features.shape()));
  const std::size_t n = features.dim(0), d = features.dim(1);
  if (labels.size() != n) {
    throw ContractError("probe: " + std::to_string(n) + " feature rows for " + std::to_string(labels.size()) + " labels");
  }
  if (n == 0) throw EmptyInputError("probe: no training samples");
  const std::set<int> classes(labels.begin(), labels.end());
  if (classes.size() < 2) throw EmptyInputError("probe: training labels contain a single class");
  if (*classes.begin() < 0 || *classes.rbegin() >= num_classes) {
    throw ContractError("probe: label outside [0, " + std::to_string(num_classes) + ")");
  }
  if (config.hidden == 0 || config.batch_size == 0 || config.epochs < 0) {
    throw ConfigError("probe: hidden width and batch size must be >= 1");
  }

  nets::Sequential<float> net;
  net.add<nets::Linear<float>>(d, config.hidden);
  net.add<nets::LeakyReLU<float>>(0.0f);
  net.add<nets::Linear<float>>(config.hidden, static_cast<std::size_t>(num_classes));
  Rng rng(derive_seed(config.seed, 0x9B0BE));
  net.init_parameters(rng);
  nets::Adam<float> opt(net.parameters(), nets::AdamConfig{config.lr});

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < n; b += config.batch_size) {
      const std::size_t m = std::min(n, b + config.batch_size) - b;
      Tensor<float> x({m, d});
      std::vector<int> y(m);
      for (std::size_t i = 0; i < m; ++i) {
        std::copy_n(features.data() + order[b + i] * d, d, x.data() + i * d);
        y[i] = labels[order[b + i]];
      }
      net.zero_grad();
      Tensor<float> grad;
      harmonizers::domain_loss(net.forward(x), y, &grad);
      net.backward(grad);
      opt.step();
    }
  }
  return Probe(std::move(net), num_classes);
}

}  // namespace plseada::metrics
