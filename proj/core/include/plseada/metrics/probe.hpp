#pragma once

#include <cstdint>
#include <span>

#include "plseada/nets/layers.hpp"

namespace plseada::metrics {

/// Three-layer MLP probe: d -> hidden -> classes, ReLU, trained with Adam.
struct ProbeConfig {
  std::size_t hidden = 128;
  int epochs = 200;
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::uint64_t seed = 7;
};

/// Hidden widths of the two evaluation probes.
inline constexpr std::size_t kDiseaseProbeHidden = 128;
inline constexpr std::size_t kDomainProbeHidden = 32;

class Probe {
 public:
  Probe(nets::Sequential<float> net, int num_classes);

  int num_classes() const noexcept { return num_classes_; }
  nets::Tensor<float> logits(const nets::Tensor<float>& features) const;
  std::vector<int> predict(const nets::Tensor<float>& features) const;
  nets::Sequential<float>& network() { return net_; }
  const nets::Sequential<float>& network() const { return net_; }

 private:
  nets::Sequential<float> net_;
  int num_classes_;
};

/// Fits a probe on (N, d) features. Raises ContractError on a length
/// mismatch and EmptyInputError when fewer than two classes are present.
Probe train_probe(const nets::Tensor<float>& features, std::span<const int> labels, int num_classes,
                  const ProbeConfig& config = {});

}  // namespace plseada::metrics
