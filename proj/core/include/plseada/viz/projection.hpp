#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plseada/core/dataset.hpp"
#include "plseada/metrics/protocol.hpp"
#include "plseada/nets/tensor.hpp"

namespace plseada::viz {

struct PointMeta {
  int domain = 0;
  Diagnosis diagnosis = Diagnosis::CN;
  std::string subject_id;
};

struct ProjectionResult {
  /// (N, 2) coordinates.
  nets::Tensor<double> coords;
  std::vector<PointMeta> meta;
  std::string backend;
  nlohmann::json params;
};

/// Exact t-SNE settings for the neighbor-embedding backend.
struct NeighborEmbeddingParams {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
};

/// "principal-components" and "neighbor-embedding" (aliases "pca", "tsne").
std::vector<std::string> available_backends();

/// 2D projection of (N, d) features, N >= 10 and d >= 2. Deterministic for
/// a given seed. Throws ConfigError naming the available backends when
/// `backend` is unknown.
ProjectionResult project_2d(const nets::Tensor<double>& features, const std::string& backend,
                            std::uint64_t seed, std::vector<PointMeta> meta = {},
                            const NeighborEmbeddingParams& params = {});

PointMeta point_meta(const SubjectRecord& record);

/// Projects the chosen latent of every image in `split`.
ProjectionResult project_latents(const nets::ModelBundle& bundle, const Dataset& dataset, Split split,
                                 metrics::LatentKind kind, const std::string& backend, std::uint64_t seed);

/// Silhouette of the 2D coordinates grouped by domain.
double domain_silhouette(const ProjectionResult& projection);

}  // namespace plseada::viz
