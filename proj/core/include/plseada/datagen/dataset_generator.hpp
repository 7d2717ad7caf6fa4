#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "plseada/core/dataset.hpp"
#include "plseada/datagen/phantom.hpp"

namespace plseada::datagen {

inline constexpr int kDatasetSpecSchemaVersion = 1;

struct DatasetSpec {
  int train_subjects_per_cell = 40;
  int test_subjects_per_cell = 10;
  int images_per_subject = 2;
  int num_domains = 2;
  Shape shape{1, 64, 64};
  std::uint64_t seed = 20240917;
  /// Empty means default_domain_effect() for every domain.
  std::vector<DomainEffect> domain_effects;
};

/// Throws ConfigError on any invalid field.
void validate(const DatasetSpec& spec);

DatasetSpec dataset_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const DatasetSpec& spec);

/// Builds the in-memory dataset: every (domain, diagnosis) cell gets the
/// requested number of train and test subjects, each with
/// images_per_subject scans. Bitwise reproducible for a fixed spec.
Dataset generate_dataset(const DatasetSpec& spec);

/// generate_dataset + write_dataset into `dir`.
Dataset generate_dataset_to(const DatasetSpec& spec, const std::filesystem::path& dir);

}  // namespace plseada::datagen
