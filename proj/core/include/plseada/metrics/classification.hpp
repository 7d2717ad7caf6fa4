#pragma once

#include <span>

#include "plseada/nets/tensor.hpp"

namespace plseada::metrics {

/// Unweighted mean of per-class F1 over `num_classes` classes. A class with
/// precision + recall = 0 contributes 0.
double macro_f1(std::span<const int> predictions, std::span<const int> labels, int num_classes);

/// Mean silhouette coefficient of an (N, k) point set under Euclidean
/// distance. Points in singleton clusters score 0. Needs >= 2 clusters.
double silhouette_score(const nets::Tensor<double>& points, std::span<const int> labels);

}  // namespace plseada::metrics
