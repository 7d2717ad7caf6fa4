#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "plseada/core/dataset.hpp"
#include "plseada/nets/network.hpp"

namespace plseada::harmonizers {

/// Passes over the training set per alternation round. A round runs stage 1,
/// then stage 2, then (after `warmup_rounds`) stage 3. Stage 2/3 counts may
/// be 0 to disable the adversarial part.
struct Schedule {
  int rounds = 24;
  int warmup_rounds = 3;
  int stage1_epochs = 1;
  int stage2_epochs = 3;
  int stage3_epochs = 1;
  /// Precede every stage-3 step with a stage-2 step on the same batch so the
  /// predictor tracks the moving encoder.
  bool interleave = true;
};

struct LossWeights {
  double recon = 1.0;
  double style = 0.1;
  double conf = 1.0;
};

struct TrainConfig {
  double alpha = 0.2;
  double lr_encoder = 1e-3;
  double lr_style = 1e-3;
  double lr_decoder = 1e-3;
  double lr_predictor = 1e-3;
  std::size_t batch_size = 16;
  Schedule schedule;
  double noise_sigma = 0.1;
  std::uint64_t seed = 1;
  LossWeights weights;
  /// Hash every component around every step and throw if a frozen one moved.
  bool verify_stage_isolation = false;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& doc);

/// Reduced-epoch profile for quick sweeps.
TrainConfig fast_profile(TrainConfig config);

enum class Stage { Reconstruction = 1, Discriminator = 2, Confusion = 3 };
using plseada::to_string;
using nets::to_string;
std::string_view to_string(Stage stage);

struct StepRecord {
  std::size_t step = 0;
  int round = 0;
  Stage stage = Stage::Reconstruction;
  std::map<std::string, double> losses;
  std::map<std::string, double> grad_norms;
};

struct TrainLog {
  std::string model;
  /// "decode(z_u)", "decode(z_u + z_d)" or "decode(z_u) + alpha*decode(z_d)".
  std::string recon_rule;
  double alpha = 0.0;
  std::vector<StepRecord> steps;
  std::size_t predictor_updates = 0;
  std::size_t isolation_checks = 0;
  /// Mean reconstruction loss over the training set before/after training.
  double initial_recon_loss = 0.0;
  double final_recon_loss = 0.0;

  void write_jsonl(const std::filesystem::path& path) const;
  nlohmann::json summary() const;
};

/// Called after every optimizer step.
using StepObserver = std::function<void(const StepRecord&, nets::ModelBundle&)>;

struct TrainResult {
  nets::ModelBundle bundle;
  TrainLog log;
};

/// Shared driver for all four trainable models. Raises ConfigError for a
/// single-domain dataset or inconsistent configs and TrainingAbort on a
/// non-finite loss.
TrainResult train_model(nets::ModelKind kind, const Dataset& dataset,
                        const nets::NetworkConfig& net_config, const TrainConfig& train_config,
                        const StepObserver& observer = {});

TrainResult train_cae(const Dataset&, const nets::NetworkConfig&, const TrainConfig&,
                      const StepObserver& = {});
TrainResult train_ada(const Dataset&, const nets::NetworkConfig&, const TrainConfig&,
                      const StepObserver& = {});
TrainResult train_se_ada(const Dataset&, const nets::NetworkConfig&, const TrainConfig&,
                         const StepObserver& = {});
TrainResult train_pl_se_ada(const Dataset&, const nets::NetworkConfig&, const TrainConfig&,
                            const StepObserver& = {});

/// Mean reconstruction MSE of `bundle` over every training image.
double mean_train_recon_loss(const nets::ModelBundle& bundle, const Dataset& dataset, double alpha);

/// FNV hash of one component's parameter bytes ("f_E", "f_SE", "affine", "f_D", "g_D").
std::uint64_t component_hash(nets::ModelBundle& bundle, std::string_view component);

}  // namespace plseada::harmonizers
