#include "plseada/metrics/classification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "plseada/core/error.hpp"

namespace plseada::metrics {

double macro_f1(std::span<const int> predictions, std::span<const int> labels, int num_classes) {
  if (predictions.empty()) throw EmptyInputError("macro_f1: empty input");
  if (predictions.size() != labels.size()) {
    throw ContractError("macro_f1: " + std::to_string(predictions.size()) + " predictions for " +
                        std::to_string(labels.size()) + " labels");
  }
  if (num_classes < 1) throw ContractError("macro_f1: num_classes must be >= 1");
  std::vector<std::size_t> tp(static_cast<std::size_t>(num_classes)), fp(tp.size()), fn(tp.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int p = predictions[i], l = labels[i];
    if (l < 0 || l >= num_classes || p < 0 || p >= num_classes) {
      throw ContractError("macro_f1: class index outside [0, " + std::to_string(num_classes) + ")");
    }
    if (p == l) {
      ++tp[static_cast<std::size_t>(l)];
    } else {
      ++fp[static_cast<std::size_t>(p)];
      ++fn[static_cast<std::size_t>(l)];
    }
  }
  double total = 0.0;
  for (std::size_t c = 0; c < tp.size(); ++c) {
    const double denom = 2.0 * static_cast<double>(tp[c]) + static_cast<double>(fp[c] + fn[c]);
    if (denom > 0.0) total += 2.0 * static_cast<double>(tp[c]) / denom;
  }
  return total / static_cast<double>(num_classes);
}

double silhouette_score(const nets::Tensor<double>& points, std::span<const int> labels) {
  if (points.rank() != 2) throw ContractError("silhouette_score: points must be (N, k)");
  const std::size_t n = points.dim(0), k = points.dim(1);
  if (labels.size() != n) throw ContractError("silhouette_score: one label per point required");
  std::map<int, std::size_t> sizes;
  for (int l : labels) ++sizes[l];
  if (sizes.size() < 2) throw ContractError("silhouette_score: needs at least 2 clusters");

  std::vector<int> cluster_ids;
  for (const auto& [id, _] : sizes) cluster_ids.push_back(id);
  double total = 0.0;
  std::vector<double> sum(cluster_ids.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double d2 = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double t = points[i * k + c] - points[j * k + c];
        d2 += t * t;
      }
      const auto pos = std::lower_bound(cluster_ids.begin(), cluster_ids.end(), labels[j]) - cluster_ids.begin();
      sum[static_cast<std::size_t>(pos)] += std::sqrt(d2);
    }
    const auto own = static_cast<std::size_t>(
        std::lower_bound(cluster_ids.begin(), cluster_ids.end(), labels[i]) - cluster_ids.begin());
    const std::size_t own_size = sizes[labels[i]];
    if (own_size < 2) continue;
    const double a = sum[own] / static_cast<double>(own_size - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cluster_ids.size(); ++c) {
      if (c == own) continue;
      b = std::min(b, sum[c] / static_cast<double>(sizes[cluster_ids[c]]));
    }
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

}  // namespace plseada::metrics
