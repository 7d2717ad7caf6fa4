#include "plseada/datagen/dataset_generator.hpp"

#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

#include "plseada/core/error.hpp"
#include "plseada/core/manifest.hpp"

namespace plseada::datagen {

using nlohmann::json;

void validate(const DatasetSpec& spec) {
  if (spec.num_domains < 2) {
    throw ConfigError("num_domains must be >= 2 (K >= 2), got " + std::to_string(spec.num_domains));
  }
  if (spec.train_subjects_per_cell < 1 || spec.test_subjects_per_cell < 1) {
    throw ConfigError("every (domain, diagnosis) cell needs at least one subject in each split");
  }
  if (spec.images_per_subject < 1) throw ConfigError("images_per_subject must be >= 1");
  if (spec.shape.size() != 3 || spec.shape[0] != 1 || spec.shape[1] < 32 || spec.shape[2] < 32) {
    throw ConfigError("synthetic images must be (1, H, W) with H, W >= 32, got " +
                      to_string(spec.shape));
  }
  if (!spec.domain_effects.empty() &&
      static_cast<int>(spec.domain_effects.size()) != spec.num_domains) {
    throw ConfigError("domain_effects must be empty or have num_domains entries");
  }
  for (const auto& e : spec.domain_effects) {
    if (!(e.gamma > 0.0)) throw ConfigError("domain effect gamma must be > 0");
    if (e.noise_sigma < 0.0) throw ConfigError("domain effect noise_sigma must be >= 0");
  }
}

DatasetSpec dataset_spec_from_json(const json& doc) {
  static const std::set<std::string> known = {
      "schema_version",   "train_subjects_per_cell", "test_subjects_per_cell",
      "images_per_subject", "num_domains",           "image_shape",
      "seed",             "domain_effects"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) throw ConfigError("unknown key in data spec: '" + key + "'");
  }
  if (doc.contains("schema_version") && doc["schema_version"].get<int>() != kDatasetSpecSchemaVersion) {
    throw ConfigError("unsupported data spec schema_version " + doc["schema_version"].dump());
  }
  DatasetSpec spec;
  try {
    spec.train_subjects_per_cell = doc.value("train_subjects_per_cell", spec.train_subjects_per_cell);
    spec.test_subjects_per_cell = doc.value("test_subjects_per_cell", spec.test_subjects_per_cell);
    spec.images_per_subject = doc.value("images_per_subject", spec.images_per_subject);
    spec.num_domains = doc.value("num_domains", spec.num_domains);
    spec.shape = doc.value("image_shape", spec.shape);
    spec.seed = doc.value("seed", spec.seed);
    if (doc.contains("domain_effects")) {
      for (const auto& e : doc["domain_effects"]) {
        DomainEffect effect;
        effect.intensity_gain = e.value("intensity_gain", 1.0);
        effect.bias_field = e.value("bias_field", effect.bias_field);
        effect.gamma = e.value("gamma", 1.0);
        effect.noise_sigma = e.value("noise_sigma", 0.0);
        spec.domain_effects.push_back(effect);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid data spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

json to_json(const DatasetSpec& spec) {
  json effects = json::array();
  for (int k = 0; k < spec.num_domains; ++k) {
    const auto e = spec.domain_effects.empty() ? default_domain_effect(k, spec.num_domains)
                                               : spec.domain_effects[static_cast<std::size_t>(k)];
    effects.push_back({{"intensity_gain", e.intensity_gain},
                       {"bias_field", e.bias_field},
                       {"gamma", e.gamma},
                       {"noise_sigma", e.noise_sigma}});
  }
  return {{"schema_version", kDatasetSpecSchemaVersion},
          {"train_subjects_per_cell", spec.train_subjects_per_cell},
          {"test_subjects_per_cell", spec.test_subjects_per_cell},
          {"images_per_subject", spec.images_per_subject},
          {"num_domains", spec.num_domains},
          {"image_shape", spec.shape},
          {"seed", spec.seed},
          {"domain_effects", std::move(effects)}};
}

Dataset generate_dataset(const DatasetSpec& spec) {
  validate(spec);
  std::vector<DomainEffect> effects = spec.domain_effects;
  if (effects.empty()) {
    for (int k = 0; k < spec.num_domains; ++k) {
      effects.push_back(default_domain_effect(k, spec.num_domains));
    }
  }

  std::vector<SubjectRecord> records;
  std::uint64_t subject_index = 0;
  for (Split split : {Split::Train, Split::Test}) {
    const int per_cell =
        split == Split::Train ? spec.train_subjects_per_cell : spec.test_subjects_per_cell;
    for (int domain = 0; domain < spec.num_domains; ++domain) {
      for (Diagnosis diagnosis : {Diagnosis::CN, Diagnosis::AD, Diagnosis::MCI}) {
        for (int i = 0; i < per_cell; ++i, ++subject_index) {
          const auto subject_seed = derive_seed(spec.seed, subject_index);
          Rng subject_rng(subject_seed);
          const auto anatomy = sample_subject_params(diagnosis, subject_rng);
          char id[16];
          std::snprintf(id, sizeof(id), "S%05llu",
                        static_cast<unsigned long long>(subject_index));
          for (int scan = 0; scan < spec.images_per_subject; ++scan) {
            Rng scan_rng(derive_seed(subject_seed, static_cast<std::uint64_t>(scan)));
            auto clean = generate_phantom(rescan(anatomy, scan_rng), spec.shape);
            auto image = apply_domain_effect(
                clean, effects[static_cast<std::size_t>(domain)],
                derive_seed(subject_seed, 1000 + static_cast<std::uint64_t>(scan)));
            records.push_back({id, domain, diagnosis, split,
                               std::make_shared<const Image>(std::move(image))});
          }
        }
      }
    }
  }
  std::vector<std::string> names;
  for (int k = 0; k < spec.num_domains; ++k) names.push_back("domain" + std::to_string(k));
  return Dataset(std::move(records), spec.num_domains, spec.shape, std::move(names), spec.seed,
                 Provenance::Synthetic);
}

Dataset generate_dataset_to(const DatasetSpec& spec, const std::filesystem::path& dir) {
  return write_dataset(generate_dataset(spec), dir);
}

}  // namespace plseada::datagen
