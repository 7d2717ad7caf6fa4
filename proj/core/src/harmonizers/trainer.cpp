#include "plseada/harmonizers/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "plseada/core/error.hpp"
#include "plseada/core/random.hpp"
#include "plseada/harmonizers/losses.hpp"
#include "plseada/harmonizers/reconstruct.hpp"
#include "plseada/nets/optimizer.hpp"

namespace plseada::harmonizers {

using nets::Adam;
using nets::AdamConfig;
using nets::ModelBundle;
using nets::ModelKind;
using nets::Tensor;
using nlohmann::json;

// ---------------------------------------------------------------- config

void TrainConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
  for (double lr : {lr_encoder, lr_style, lr_decoder, lr_predictor}) {
    if (!(lr > 0.0)) throw ConfigError("learning rates must be > 0");
  }
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (schedule.rounds < 1) throw ConfigError("schedule.rounds must be >= 1");
  if (schedule.stage1_epochs < 1) throw ConfigError("schedule.stage1_epochs must be >= 1");
  if (schedule.stage2_epochs < 0 || schedule.stage3_epochs < 0 || schedule.warmup_rounds < 0) {
    throw ConfigError("stage 2/3 epoch counts and warmup_rounds must be >= 0");
  }
  if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
  if (weights.recon < 0.0 || weights.style < 0.0 || weights.conf < 0.0) {
    throw ConfigError("loss weights must be >= 0");
  }
}

json to_json(const TrainConfig& c) {
  return {{"alpha", c.alpha},
          {"lr", {{"encoder", c.lr_encoder}, {"style", c.lr_style}, {"decoder", c.lr_decoder},
                  {"predictor", c.lr_predictor}}},
          {"batch_size", c.batch_size},
          {"schedule", {{"rounds", c.schedule.rounds},
                        {"warmup_rounds", c.schedule.warmup_rounds},
                        {"stage1_epochs", c.schedule.stage1_epochs},
                        {"stage2_epochs", c.schedule.stage2_epochs},
                        {"stage3_epochs", c.schedule.stage3_epochs},
                        {"interleave", c.schedule.interleave}}},
          {"noise_sigma", c.noise_sigma},
          {"seed", c.seed},
          {"weights", {{"recon", c.weights.recon}, {"style", c.weights.style}, {"conf", c.weights.conf}}},
          {"verify_stage_isolation", c.verify_stage_isolation}};
}

namespace {

void reject_unknown(const json& doc, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) throw ConfigError("unknown key in " + where + ": '" + key + "'");
  }
}

}  // namespace

TrainConfig train_config_from_json(const json& doc) {
  reject_unknown(doc, {"alpha", "lr", "batch_size", "schedule", "noise_sigma", "seed", "weights",
                       "verify_stage_isolation", "profile"},
                 "train config");
  TrainConfig c;
  try {
    c.alpha = doc.value("alpha", c.alpha);
    if (doc.contains("lr")) {
      const auto& lr = doc["lr"];
      if (lr.is_number()) {
        c.lr_encoder = c.lr_style = c.lr_decoder = c.lr_predictor = lr.get<double>();
      } else {
        reject_unknown(lr, {"encoder", "style", "decoder", "predictor"}, "train.lr");
        c.lr_encoder = lr.value("encoder", c.lr_encoder);
        c.lr_style = lr.value("style", c.lr_style);
        c.lr_decoder = lr.value("decoder", c.lr_decoder);
        c.lr_predictor = lr.value("predictor", c.lr_predictor);
      }
    }
    c.batch_size = doc.value("batch_size", c.batch_size);
    if (doc.contains("schedule")) {
      const auto& s = doc["schedule"];
      reject_unknown(s, {"rounds", "warmup_rounds", "stage1_epochs", "stage2_epochs", "stage3_epochs", "interleave"},
                     "train.schedule");
      c.schedule.rounds = s.value("rounds", c.schedule.rounds);
      c.schedule.warmup_rounds = s.value("warmup_rounds", c.schedule.warmup_rounds);
      c.schedule.stage1_epochs = s.value("stage1_epochs", c.schedule.stage1_epochs);
      c.schedule.stage2_epochs = s.value("stage2_epochs", c.schedule.stage2_epochs);
      c.schedule.stage3_epochs = s.value("stage3_epochs", c.schedule.stage3_epochs);
      c.schedule.interleave = s.value("interleave", c.schedule.interleave);
    }
    c.noise_sigma = doc.value("noise_sigma", c.noise_sigma);
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("weights")) {
      const auto& w = doc["weights"];
      reject_unknown(w, {"recon", "style", "conf"}, "train.weights");
      c.weights.recon = w.value("recon", c.weights.recon);
      c.weights.style = w.value("style", c.weights.style);
      c.weights.conf = w.value("conf", c.weights.conf);
    }
    c.verify_stage_isolation = doc.value("verify_stage_isolation", c.verify_stage_isolation);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid train config: ") + e.what());
  }
  if (doc.value("profile", std::string("default")) == "fast") c = fast_profile(c);
  c.validate();
  return c;
}

TrainConfig fast_profile(TrainConfig config) {
  config.schedule.rounds = std::min(config.schedule.rounds, 8);
  config.schedule.warmup_rounds = std::min(config.schedule.warmup_rounds, 2);
  return config;
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Reconstruction: return "reconstruction";
    case Stage::Discriminator: return "discriminator";
    case Stage::Confusion: return "confusion";
  }
  return "?";
}

// ---------------------------------------------------------------- log

void TrainLog::write_jsonl(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw MissingArtifact("cannot write train log " + path.string());
  for (const auto& s : steps) {
    json line = {{"step", s.step},
                 {"round", s.round},
                 {"stage", std::string(to_string(s.stage))},
                 {"losses", s.losses},
                 {"grad_norms", s.grad_norms}};
    out << line.dump() << '\n';
  }
}

json TrainLog::summary() const {
  json last_losses = json::object();
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    for (const auto& [k, v] : it->losses) {
      if (!last_losses.contains(k)) last_losses[k] = v;
    }
  }
  return {{"model", model},
          {"recon_rule", recon_rule},
          {"alpha", alpha},
          {"steps", steps.size()},
          {"predictor_updates", predictor_updates},
          {"g_D_updated", predictor_updates > 0},
          {"isolation_checks", isolation_checks},
          {"initial_recon_loss", initial_recon_loss},
          {"final_recon_loss", final_recon_loss},
          {"final_losses", last_losses}};
}

// ---------------------------------------------------------------- helpers

std::uint64_t component_hash(ModelBundle& bundle, std::string_view component) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  const std::string prefix = std::string(component) + ".";
  for (const auto& np : bundle.named_parameters()) {
    if (np.path.compare(0, prefix.size(), prefix) != 0) continue;
    const auto* bytes = reinterpret_cast<const unsigned char*>(np.param->value.data());
    const auto n = np.param->value.size() * sizeof(float);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001B3ULL;
    }
  }
  return h;
}

double mean_train_recon_loss(const ModelBundle& bundle, const Dataset& dataset, double alpha) {
  const auto records = dataset.split(Split::Train);
  if (records.empty()) throw EmptyInputError("no training records");
  double total = 0.0;
  std::size_t count = 0;
  constexpr std::size_t kChunk = 64;
  for (std::size_t begin = 0; begin < records.size(); begin += kChunk) {
    const auto end = std::min(records.size(), begin + kChunk);
    std::vector<Image> images;
    for (std::size_t i = begin; i < end; ++i) images.push_back(dataset.load_image(records[i]));
    const auto batch = nets::to_batch(images);
    const auto recon = reconstruct_batch(bundle, batch, alpha);
    total += recon_loss(batch, recon) * static_cast<double>(end - begin);
    count += end - begin;
  }
  return total / static_cast<double>(count);
}

namespace {

const std::vector<std::string>& all_components() {
  static const std::vector<std::string> names = {"f_E", "f_SE", "affine", "f_D", "g_D"};
  return names;
}

std::string recon_rule(ModelKind kind) {
  switch (kind) {
    case ModelKind::Cae:
    case ModelKind::Ada: return "decode(z_u)";
    case ModelKind::SeAda: return "decode(z_u + z_d)";
    case ModelKind::PlSeAda: return "decode(z_u) + alpha*decode(z_d)";
  }
  return "?";
}

class Trainer {
 public:
  Trainer(ModelKind kind, const Dataset& dataset, const nets::NetworkConfig& net,
          const TrainConfig& cfg, const StepObserver& observer)
      : kind_(kind),
        cfg_(cfg),
        observer_(observer),
        bundle_(ModelBundle::create(net, kind, derive_seed(cfg.seed, 0xB0D1E))),
        rng_(derive_seed(cfg.seed, 0x5E7)) {
    const auto records = dataset.split(Split::Train);
    if (records.empty()) throw EmptyInputError("training split is empty");
    std::set<int> domains;
    std::vector<Image> images;
    for (const auto& r : records) {
      images.push_back(dataset.load_image(r));
      labels_.push_back(r.domain);
      domains.insert(r.domain);
    }
    if (adversarial() && domains.size() < 2) {
      throw ConfigError("adversarial training needs at least 2 domains in the training split");
    }
    images_ = nets::to_batch(images);

    enc_opt_.emplace(bundle_.encoder().parameters(), AdamConfig{cfg.lr_encoder});
    adv_opt_.emplace(bundle_.encoder().parameters(), AdamConfig{cfg.lr_encoder});
    dec_opt_.emplace(bundle_.decoder().parameters(), AdamConfig{cfg.lr_decoder});
    pred_opt_.emplace(bundle_.predictor().parameters(), AdamConfig{cfg.lr_predictor});
    if (bundle_.has_style()) {
      auto params = bundle_.style_encoder().parameters();
      for (auto* p : bundle_.affine().parameters()) params.push_back(p);
      style_opt_.emplace(params, AdamConfig{cfg.lr_style});
    }
    log_.model = std::string(nets::to_string(kind));
    log_.recon_rule = recon_rule(kind);
    log_.alpha = kind == ModelKind::PlSeAda ? cfg.alpha : 0.0;
  }

  TrainResult run(const Dataset& dataset) {
    log_.initial_recon_loss = mean_train_recon_loss(bundle_, dataset, cfg_.alpha);
    const auto& s = cfg_.schedule;
    for (int round = 0; round < s.rounds; ++round) {
      round_ = round;
      for (int e = 0; e < s.stage1_epochs; ++e) stage1_epoch();
      if (!adversarial()) continue;
      if (s.stage2_epochs > 0) stage2(s.stage2_epochs);
      if (round >= s.warmup_rounds && cfg_.weights.conf > 0.0) {
        for (int e = 0; e < s.stage3_epochs; ++e) stage3_epoch();
      }
    }
    log_.final_recon_loss = mean_train_recon_loss(bundle_, dataset, cfg_.alpha);
    return {std::move(bundle_), std::move(log_)};
  }

 private:
  bool adversarial() const { return kind_ != ModelKind::Cae; }

  std::vector<std::vector<std::size_t>> batches(std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng_);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t b = 0; b < n; b += cfg_.batch_size) {
      out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b),
                       order.begin() + static_cast<std::ptrdiff_t>(std::min(n, b + cfg_.batch_size)));
    }
    return out;
  }

  static Tensor<float> gather(const Tensor<float>& src, const std::vector<std::size_t>& idx) {
    Shape s = src.shape();
    s[0] = idx.size();
    Tensor<float> out(s);
    const auto item = src.item_size();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::copy_n(src.data() + idx[i] * item, item, out.data() + i * item);
    }
    return out;
  }

  std::vector<int> gather_labels(const std::vector<std::size_t>& idx) const {
    std::vector<int> out;
    for (auto i : idx) out.push_back(labels_[i]);
    return out;
  }

  void zero_all() {
    bundle_.encoder().zero_grad();
    bundle_.decoder().zero_grad();
    bundle_.predictor().zero_grad();
    if (bundle_.has_style()) {
      bundle_.style_encoder().zero_grad();
      bundle_.affine().zero_grad();
    }
  }

  std::map<std::string, std::uint64_t> snapshot() {
    std::map<std::string, std::uint64_t> h;
    for (const auto& c : all_components()) h[c] = component_hash(bundle_, c);
    return h;
  }

  void verify(Stage stage, const std::map<std::string, std::uint64_t>& before) {
    std::set<std::string> movable;
    switch (stage) {
      case Stage::Reconstruction: movable = {"f_E", "f_SE", "affine", "f_D"}; break;
      case Stage::Discriminator: movable = {"g_D"}; break;
      case Stage::Confusion: movable = {"f_E"}; break;
    }
    const auto after = snapshot();
    for (const auto& [component, hash] : before) {
      if (!movable.contains(component) && after.at(component) != hash) {
        throw ContractError("stage isolation violated: " + component + " changed during " +
                            std::string(to_string(stage)) + " step " + std::to_string(step_));
      }
    }
    ++log_.isolation_checks;
  }

  void finish_step(StepRecord record, const std::map<std::string, std::uint64_t>* before) {
    for (const auto& [name, value] : record.losses) {
      if (!std::isfinite(value)) {
        throw TrainingAbort(std::string(to_string(record.stage)), step_,
                            "non-finite " + name + " loss");
      }
    }
    if (before) verify(record.stage, *before);
    record.step = step_++;
    record.round = round_;
    if (observer_) observer_(record, bundle_);
    log_.steps.push_back(std::move(record));
  }

  void stage1_epoch() {
    for (const auto& idx : batches(images_.dim(0))) {
      std::map<std::string, std::uint64_t> before;
      if (cfg_.verify_stage_isolation) before = snapshot();
      zero_all();
      const auto x = gather(images_, idx);
      const auto labels = gather_labels(idx);
      const auto n = idx.size();
      StepRecord rec;
      rec.stage = Stage::Reconstruction;

      auto z_u = bundle_.encoder().forward(x);
      Tensor<float> grad_x_prime;
      if (kind_ == ModelKind::Cae || kind_ == ModelKind::Ada) {
        auto x_prime = bundle_.decoder().forward(z_u);
        const double recon = recon_loss(x, x_prime, &grad_x_prime);
        scale(grad_x_prime, cfg_.weights.recon);
        rec.losses["recon"] = recon;
        bundle_.encoder().backward(bundle_.decoder().backward(grad_x_prime));
      } else {
        auto z_dp = bundle_.style_encoder().forward(x);
        auto z_d = bundle_.affine().forward(z_dp);
        Tensor<float> grad_style;
        double style = 0.0;
        if (cfg_.weights.style > 0.0) {
          style = style_supervision_loss(z_dp, labels, bundle_.config().num_domains, &grad_style);
          scale(grad_style, cfg_.weights.style);
        } else {
          grad_style = Tensor<float>(z_dp.shape());
        }
        rec.losses["style"] = style;

        Tensor<float> grad_z_u, grad_z_d;
        if (kind_ == ModelKind::SeAda) {
          Tensor<float> z = z_u;
          for (std::size_t i = 0; i < z.size(); ++i) z[i] += z_d[i];
          auto x_prime = bundle_.decoder().forward(z);
          rec.losses["recon"] = recon_loss(x, x_prime, &grad_x_prime);
          scale(grad_x_prime, cfg_.weights.recon);
          grad_z_u = bundle_.decoder().backward(grad_x_prime);
          grad_z_d = grad_z_u;
        } else {
          // One decoder pass over [z_u; z_d] keeps a single shared f_D.
          auto decoded = bundle_.decoder().forward(nets::concat_rows(z_u, z_d));
          const auto x_u = decoded.slice_rows(0, n);
          const auto x_d = decoded.slice_rows(n, 2 * n);
          Tensor<float> x_prime(x_u.shape(),
                                pseudo_linear_sum(x_u.values(), x_d.values(), static_cast<float>(cfg_.alpha)));
          rec.losses["recon"] = recon_loss(x, x_prime, &grad_x_prime);
          scale(grad_x_prime, cfg_.weights.recon);
          Tensor<float> grad_x_d = grad_x_prime;
          scale(grad_x_d, cfg_.alpha);
          auto grad_z = bundle_.decoder().backward(nets::concat_rows(grad_x_prime, grad_x_d));
          grad_z_u = grad_z.slice_rows(0, n);
          grad_z_d = grad_z.slice_rows(n, 2 * n);
        }
        bundle_.encoder().backward(grad_z_u);
        auto grad_z_dp = bundle_.affine().backward(grad_z_d);
        for (std::size_t i = 0; i < grad_z_dp.size(); ++i) grad_z_dp[i] += grad_style[i];
        bundle_.style_encoder().backward(grad_z_dp);
      }

      rec.grad_norms["f_E"] = enc_opt_->grad_norm();
      rec.grad_norms["f_D"] = dec_opt_->grad_norm();
      check_finite(rec);
      enc_opt_->step();
      dec_opt_->step();
      if (style_opt_) {
        rec.grad_norms["f_SE"] = style_opt_->grad_norm();
        check_finite(rec);
        style_opt_->step();
      }
      finish_step(std::move(rec), cfg_.verify_stage_isolation ? &before : nullptr);
    }
  }

  void stage2(int epochs) {
    // f_E is frozen for the whole stage, so z_u is computed once.
    Tensor<float> z_all;
    {
      constexpr std::size_t kChunk = 64;
      const auto n = images_.dim(0);
      std::vector<float> data;
      for (std::size_t b = 0; b < n; b += kChunk) {
        std::vector<std::size_t> idx(std::min(n, b + kChunk) - b);
        std::iota(idx.begin(), idx.end(), b);
        auto z = bundle_.encoder().apply(gather(images_, idx));
        data.insert(data.end(), z.storage().begin(), z.storage().end());
      }
      z_all = Tensor<float>({n, bundle_.config().d_u}, std::move(data));
    }
    for (int e = 0; e < epochs; ++e) {
      for (const auto& idx : batches(images_.dim(0))) predictor_step(gather(z_all, idx), idx);
    }
  }

  void predictor_step(const Tensor<float>& z_u, const std::vector<std::size_t>& idx) {
    std::map<std::string, std::uint64_t> before;
    if (cfg_.verify_stage_isolation) before = snapshot();
    zero_all();
    StepRecord rec;
    rec.stage = Stage::Discriminator;
    auto logits = bundle_.predictor().forward(z_u);
    Tensor<float> grad;
    rec.losses["domain"] = domain_loss(logits, gather_labels(idx), &grad);
    bundle_.predictor().backward(grad);
    rec.grad_norms["g_D"] = pred_opt_->grad_norm();
    check_finite(rec);
    pred_opt_->step();
    ++log_.predictor_updates;
    finish_step(std::move(rec), cfg_.verify_stage_isolation ? &before : nullptr);
  }

  void stage3_epoch() {
    for (const auto& idx : batches(images_.dim(0))) {
      const auto x = gather(images_, idx);
      if (cfg_.schedule.interleave) predictor_step(bundle_.encoder().apply(x), idx);
      std::map<std::string, std::uint64_t> before;
      if (cfg_.verify_stage_isolation) before = snapshot();
      zero_all();
      StepRecord rec;
      rec.stage = Stage::Confusion;
      auto z_u = bundle_.encoder().forward(x);
      auto logits = bundle_.predictor().forward(z_u);
      Tensor<float> grad;
      rec.losses["confusion"] = confusion_loss(logits, &grad);
      scale(grad, cfg_.weights.conf);
      bundle_.encoder().backward(bundle_.predictor().backward(grad));
      bundle_.predictor().zero_grad();
      rec.grad_norms["f_E"] = adv_opt_->grad_norm();
      check_finite(rec);
      adv_opt_->step();
      finish_step(std::move(rec), cfg_.verify_stage_isolation ? &before : nullptr);
    }
  }

  static void scale(Tensor<float>& t, double factor) {
    const auto f = static_cast<float>(factor);
    for (auto& v : t.values()) v *= f;
  }

  void check_finite(const StepRecord& rec) const {
    for (const auto& [name, v] : rec.losses) {
      if (!std::isfinite(v)) throw TrainingAbort(std::string(to_string(rec.stage)), step_, "non-finite " + name + " loss");
    }
    for (const auto& [name, v] : rec.grad_norms) {
      if (!std::isfinite(v)) throw TrainingAbort(std::string(to_string(rec.stage)), step_, "non-finite gradient in " + name);
    }
  }

  ModelKind kind_;
  TrainConfig cfg_;
  StepObserver observer_;
  ModelBundle bundle_;
  Rng rng_;
  Tensor<float> images_;
  std::vector<int> labels_;
  std::optional<Adam<float>> enc_opt_, adv_opt_, dec_opt_, pred_opt_, style_opt_;
  TrainLog log_;
  std::size_t step_ = 0;
  int round_ = 0;
};

}  // namespace

TrainResult train_model(ModelKind kind, const Dataset& dataset, const nets::NetworkConfig& net_config,
                        const TrainConfig& train_config, const StepObserver& observer) {
  train_config.validate();
  net_config.validate();
  if (dataset.num_domains() < 2) throw ConfigError("training needs a dataset with >= 2 domains");
  if (net_config.num_domains != dataset.num_domains()) {
    throw ConfigError("network num_domains (" + std::to_string(net_config.num_domains) +
                      ") differs from the dataset's (" + std::to_string(dataset.num_domains()) + ")");
  }
  if (net_config.image_shape != dataset.image_shape()) {
    throw ConfigError("network image_shape " + to_string(net_config.image_shape) +
                      " differs from the dataset's " + to_string(dataset.image_shape()));
  }
  if (nets::uses_style_encoder(kind) && train_config.weights.style > 0.0 &&
      net_config.d_s != static_cast<std::size_t>(net_config.num_domains)) {
    throw ConfigError("style supervision reads z_d' as domain logits, so d_s must equal K; attach a "
                      "separate head to z_d' or set weights.style = 0");
  }
  Trainer trainer(kind, dataset, net_config, train_config, observer);
  return trainer.run(dataset);
}

TrainResult train_cae(const Dataset& d, const nets::NetworkConfig& n, const TrainConfig& t,
                      const StepObserver& o) {
  return train_model(ModelKind::Cae, d, n, t, o);
}
TrainResult train_ada(const Dataset& d, const nets::NetworkConfig& n, const TrainConfig& t,
                      const StepObserver& o) {
  return train_model(ModelKind::Ada, d, n, t, o);
}
TrainResult train_se_ada(const Dataset& d, const nets::NetworkConfig& n, const TrainConfig& t,
                         const StepObserver& o) {
  return train_model(ModelKind::SeAda, d, n, t, o);
}
TrainResult train_pl_se_ada(const Dataset& d, const nets::NetworkConfig& n, const TrainConfig& t,
                            const StepObserver& o) {
  return train_model(ModelKind::PlSeAda, d, n, t, o);
}

}  // namespace plseada::harmonizers
