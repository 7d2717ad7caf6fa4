#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plseada/datagen/dataset_generator.hpp"
#include "plseada/harmonizers/trainer.hpp"
#include "plseada/metrics/evaluation.hpp"
#include "plseada/nets/network.hpp"

namespace plseada::cli {

inline constexpr int kRunConfigSchemaVersion = 1;

struct VizConfig {
  std::string backend = "neighbor-embedding";
  std::vector<double> alphas = {0.05, 0.1, 0.2, 0.5, 1.0, 1.5};
  std::size_t grid_images = 4;
};

/// Effective configuration of one command invocation. Every section has
/// defaults, so an empty file is valid.
struct RunConfig {
  std::uint64_t seed = 1;
  std::filesystem::path output_dir;
  datagen::DatasetSpec data;
  nets::NetworkConfig model;
  harmonizers::TrainConfig train;
  metrics::EvalConfig eval;
  VizConfig viz;
};

/// Parses a JSON document that may contain // and /* */ comments.
nlohmann::json parse_config_text(const std::string& text, const std::string& origin);

RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

/// Output root: explicit flag, else $PLSEADA_OUT, else config output_dir, else "runs".
std::filesystem::path resolve_output_root(const std::string& flag, const RunConfig& config);

}  // namespace plseada::cli
