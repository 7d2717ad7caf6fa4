#include "plseada/metrics/evaluation.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "plseada/core/error.hpp"
#include "plseada/core/random.hpp"
#include "plseada/harmonizers/reconstruct.hpp"

namespace plseada::metrics {

using nlohmann::json;

json to_json(const EvalConfig& c) {
  return {{"probe_seed", c.probe_seed},
          {"probe_epochs", c.probe_epochs},
          {"probe_lr", c.probe_lr},
          {"probe_batch_size", c.probe_batch_size},
          {"noise_sigma", c.noise_sigma},
          {"ssim", {{"window", c.ssim.window},
                    {"sigma", c.ssim.sigma},
                    {"k1", c.ssim.k1},
                    {"k2", c.ssim.k2},
                    {"dynamic_range", c.ssim.dynamic_range}}}};
}

EvalConfig eval_config_from_json(const json& doc) {
  const std::set<std::string> known = {"probe_seed", "probe_epochs", "probe_lr", "probe_batch_size",
                                       "noise_sigma", "ssim"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) throw ConfigError("unknown key in eval config: '" + key + "'");
  }
  EvalConfig c;
  try {
    c.probe_seed = doc.value("probe_seed", c.probe_seed);
    c.probe_epochs = doc.value("probe_epochs", c.probe_epochs);
    c.probe_lr = doc.value("probe_lr", c.probe_lr);
    c.probe_batch_size = doc.value("probe_batch_size", c.probe_batch_size);
    c.noise_sigma = doc.value("noise_sigma", c.noise_sigma);
    if (doc.contains("ssim")) {
      const auto& s = doc["ssim"];
      for (const auto& [key, _] : s.items()) {
        if (!std::set<std::string>{"window", "sigma", "k1", "k2", "dynamic_range"}.contains(key)) {
          throw ConfigError("unknown key in eval.ssim: '" + key + "'");
        }
      }
      c.ssim.window = s.value("window", c.ssim.window);
      c.ssim.sigma = s.value("sigma", c.ssim.sigma);
      c.ssim.k1 = s.value("k1", c.ssim.k1);
      c.ssim.k2 = s.value("k2", c.ssim.k2);
      c.ssim.dynamic_range = s.value("dynamic_range", c.ssim.dynamic_range);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid eval config: ") + e.what());
  }
  if (c.probe_epochs < 0 || c.probe_batch_size == 0 || !(c.probe_lr > 0.0) || c.noise_sigma < 0.0) {
    throw ConfigError("eval config: probe_epochs >= 0, probe_batch_size >= 1, probe_lr > 0, noise_sigma >= 0");
  }
  return c;
}

ProbeOptions probe_options(const EvalConfig& config) {
  ProbeOptions options;
  options.seed = config.probe_seed;
  options.probe.epochs = config.probe_epochs;
  options.probe.lr = config.probe_lr;
  options.probe.batch_size = config.probe_batch_size;
  return options;
}

ReconstructionQuality reconstruction_quality(const nets::ModelBundle& bundle, const Dataset& dataset, Split split,
                                             double alpha, const SsimParams& params) {
  const auto records = dataset.split(split);
  if (records.empty()) throw EmptyInputError("no records in the evaluation split");
  ReconstructionQuality q;
  constexpr std::size_t kChunk = 64;
  for (std::size_t b = 0; b < records.size(); b += kChunk) {
    std::vector<Image> images;
    for (std::size_t i = b; i < std::min(records.size(), b + kChunk); ++i) images.push_back(dataset.load_image(records[i]));
    const auto recon = harmonizers::reconstruct_batch(bundle, nets::to_batch(images), alpha);
    for (std::size_t i = 0; i < images.size(); ++i) {
      const auto x_prime = nets::image_from_batch(recon, i);
      q.rmse += rmse(images[i], x_prime);
      q.ssim += ssim(images[i], x_prime, params);
    }
  }
  q.images = records.size();
  q.rmse /= static_cast<double>(q.images);
  q.ssim /= static_cast<double>(q.images);
  return q;
}

ModelEvaluation evaluate_model(const nets::ModelBundle& bundle, const Dataset& dataset, const EvalConfig& config,
                               double alpha, std::uint64_t seed) {
  ModelEvaluation out;
  auto& r = out.report;
  r.model_name = std::string(nets::to_string(bundle.kind()));
  r.flags = flags_for(r.model_name);
  r.seed = seed;
  r.dataset_hash = std::to_string(dataset.content_hash());
  if (bundle.kind() == nets::ModelKind::PlSeAda) r.alpha = alpha;
  const auto quality = reconstruction_quality(bundle, dataset, Split::Test, alpha, config.ssim);
  r.rmse = quality.rmse;
  r.ssim = quality.ssim;
  const auto options = probe_options(config);
  const auto z_u = latent_features(bundle, dataset, LatentKind::ZU);
  r.disease_f1 = evaluate_disease(dataset, z_u, options).f1;
  r.domain_f1 = evaluate_domain(dataset, z_u, options).f1;
  if (bundle.has_style()) {
    out.z_d_prime_domain_f1 = evaluate_domain(dataset, latent_features(bundle, dataset, LatentKind::ZDPrime), options).f1;
  }
  r.validate();
  return out;
}

MetricsReport evaluate_feature_baseline(const nets::ModelBundle& cae, const Dataset& dataset, const std::string& method,
                                        const EvalConfig& config, std::uint64_t seed) {
  if (cae.kind() != nets::ModelKind::Cae) throw ContractError("feature baselines post-process a cae bundle");
  auto options = probe_options(config);
  if (method == "noise") {
    options.transform = noise_transform(config.noise_sigma, derive_seed(seed, 0x4015E));
  } else if (method == "combat") {
    options.transform = combat_transform();
  } else {
    throw ConfigError("unknown feature baseline '" + method + "' (expected noise or combat)");
  }
  MetricsReport r;
  r.model_name = method;
  r.flags = flags_for(method);
  r.seed = seed;
  r.dataset_hash = std::to_string(dataset.content_hash());
  const auto z_u = latent_features(cae, dataset, LatentKind::ZU);
  r.disease_f1 = evaluate_disease(dataset, z_u, options).f1;
  r.domain_f1 = evaluate_domain(dataset, z_u, options).f1;
  r.validate();
  return r;
}

}  // namespace plseada::metrics
