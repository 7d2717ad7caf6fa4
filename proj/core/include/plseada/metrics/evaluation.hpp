#pragma once

#include <optional>

#include <nlohmann/json_fwd.hpp>

#include "plseada/metrics/image_metrics.hpp"
#include "plseada/metrics/protocol.hpp"
#include "plseada/metrics/report.hpp"

namespace plseada::metrics {

struct EvalConfig {
  std::uint64_t probe_seed = 7;
  int probe_epochs = 200;
  double probe_lr = 1e-3;
  std::size_t probe_batch_size = 32;
  /// Feature noise for the "noise" row.
  double noise_sigma = 0.1;
  SsimParams ssim;
};

nlohmann::json to_json(const EvalConfig& config);
EvalConfig eval_config_from_json(const nlohmann::json& doc);

struct ReconstructionQuality {
  double rmse = 0.0;
  double ssim = 0.0;
  std::size_t images = 0;
};

/// Per-image RMSE and SSIM of the model's own reconstruction, averaged over
/// every image of `split`.
ReconstructionQuality reconstruction_quality(const nets::ModelBundle& bundle, const Dataset& dataset,
                                             Split split, double alpha, const SsimParams& ssim = {});

struct ModelEvaluation {
  MetricsReport report;
  /// Domain probe on z_d' (style models only).
  std::optional<double> z_d_prime_domain_f1;
};

/// Full row for a trained model: reconstruction on the test split, disease
/// and domain probes on z_u.
ModelEvaluation evaluate_model(const nets::ModelBundle& bundle, const Dataset& dataset, const EvalConfig& config,
                               double alpha, std::uint64_t seed);

/// "noise" or "combat" row from a CAE bundle's z_u; reconstruction is n/a.
MetricsReport evaluate_feature_baseline(const nets::ModelBundle& cae, const Dataset& dataset,
                                        const std::string& method, const EvalConfig& config, std::uint64_t seed);

ProbeOptions probe_options(const EvalConfig& config);

}  // namespace plseada::metrics
