#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "plseada/core/dataset.hpp"
#include "plseada/metrics/probe.hpp"
#include "plseada/nets/network.hpp"

namespace plseada::metrics {

/// Produces one (N, d) feature row per record, in order.
using FeatureSource = std::function<nets::Tensor<float>(std::span<const SubjectRecord>)>;

/// Receives every record a probe evaluation hands to its feature source,
/// tagged with the probe split it serves.
using RecordAudit = std::function<void(const SubjectRecord&, Split)>;

/// Protocol-filtered probe inputs, exposed so feature post-processing
/// (noise, ComBat) can see both splits.
struct ProbeData {
  std::vector<SubjectRecord> train_records;
  nets::Tensor<float> train_features;
  std::vector<SubjectRecord> test_records;
  nets::Tensor<float> test_features;
};
using FeatureTransform = std::function<void(ProbeData&)>;

struct ProbeOptions {
  std::uint64_t seed = 7;
  /// Epochs, lr and batch size; the hidden width is fixed per probe.
  ProbeConfig probe;
  RecordAudit audit;
  FeatureTransform transform;
};

struct ProbeOutcome {
  double f1 = 0.0;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
};

/// AD vs CN probe: trained on train AD/CN, one image per subject; macro-F1
/// on test AD/CN, one image per subject. Throws ContractError if either
/// class is missing from either split.
ProbeOutcome evaluate_disease(const Dataset& dataset, const FeatureSource& features,
                              const ProbeOptions& options = {});

/// Domain probe restricted to CN records in both splits, one image per
/// subject. Throws ContractError if fewer than two domains remain.
ProbeOutcome evaluate_domain(const Dataset& dataset, const FeatureSource& features,
                             const ProbeOptions& options = {});

enum class LatentKind { ZU, ZD, ZDPrime };

/// Feature source that encodes each record's image with `bundle`.
FeatureSource latent_features(const nets::ModelBundle& bundle, const Dataset& dataset,
                              LatentKind kind = LatentKind::ZU);

/// Gaussian perturbation of both splits' features.
FeatureTransform noise_transform(double sigma, std::uint64_t seed);

/// ComBat fitted on the probe's training features with site = domain, then
/// applied to both splits.
FeatureTransform combat_transform();

}  // namespace plseada::metrics
