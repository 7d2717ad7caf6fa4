#include "plseada/viz/projection.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "plseada/core/error.hpp"
#include "plseada/core/random.hpp"
#include "plseada/metrics/classification.hpp"

namespace plseada::viz {

using nets::Tensor;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<std::string> available_backends() { return {"principal-components", "neighbor-embedding"}; }

PointMeta point_meta(const SubjectRecord& r) { return {r.domain, r.diagnosis, r.subject_id}; }

namespace {

Matrix pca_2d(const Matrix& x) {
  const Matrix centered = x.rowwise() - x.colwise().mean();
  const Matrix cov = (centered.transpose() * centered) / std::max<double>(1.0, static_cast<double>(x.rows() - 1));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  // Eigenvalues ascend; take the last two columns, largest first.
  Matrix basis(x.cols(), 2);
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(x.cols() - 1 - c);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    basis.col(c) = v;
  }
  return centered * basis;
}

// Conditional affinities with a per-point precision matched to the perplexity.
Matrix joint_affinities(const Matrix& x, double perplexity) {
  const auto n = x.rows();
  Matrix d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) d2(i, j) = (x.row(i) - x.row(j)).squaredNorm();
  }
  const double target = std::log(perplexity);
  Matrix p = Matrix::Zero(n, n);
  std::vector<double> row(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double min_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) min_d = std::min(min_d, d2(i, j));
    }
    for (int it = 0; it < 100; ++it) {
      double sum = 0.0, weighted = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double v = j == i ? 0.0 : std::exp(-beta * (d2(i, j) - min_d));
        row[static_cast<std::size_t>(j)] = v;
        sum += v;
        weighted += v * (d2(i, j) - min_d);
      }
      const double entropy = std::log(sum) + beta * weighted / sum;
      for (Eigen::Index j = 0; j < n; ++j) p(i, j) = row[static_cast<std::size_t>(j)] / sum;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = (beta + lo) / 2.0;
      }
    }
  }
  Matrix joint = (p + p.transpose()) / (2.0 * static_cast<double>(n));
  return joint.cwiseMax(1e-12);
}

Matrix tsne_2d(const Matrix& x, std::uint64_t seed, const NeighborEmbeddingParams& params) {
  const auto n = x.rows();
  const double perplexity = std::min(params.perplexity, (static_cast<double>(n) - 1.0) / 3.0);
  const Matrix p = joint_affinities(x, perplexity);

  Matrix y = pca_2d(x);
  const double scale = std::sqrt(y.squaredNorm() / static_cast<double>(y.size()));
  y *= scale > 0.0 ? 1e-4 / scale : 0.0;
  Rng rng(seed);
  std::normal_distribution<double> jitter(0.0, 1e-6);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] += jitter(rng);

  Matrix velocity = Matrix::Zero(n, 2), gains = Matrix::Ones(n, 2), grad(n, 2), num(n, n);
  for (int it = 0; it < params.iterations; ++it) {
    const double exaggeration = it < params.exaggeration_iterations ? params.early_exaggeration : 1.0;
    const double momentum = it < params.exaggeration_iterations ? 0.5 : 0.8;
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      num(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double v = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
        num(i, j) = num(j, i) = v;
        total += 2.0 * v;
      }
    }
    grad.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = std::max(num(i, j) / total, 1e-12);
        grad.row(i) += 4.0 * (exaggeration * p(i, j) - q) * num(i, j) * (y.row(i) - y.row(j));
      }
    }
    for (Eigen::Index k = 0; k < grad.size(); ++k) {
      double& g = gains.data()[k];
      g = (grad.data()[k] > 0) != (velocity.data()[k] > 0) ? g + 0.2 : g * 0.8;
      g = std::max(g, 0.01);
      velocity.data()[k] = momentum * velocity.data()[k] - params.learning_rate * g * grad.data()[k];
    }
    y += velocity;
    y = y.rowwise() - y.colwise().mean();
  }
  return y;
}

}  // namespace

ProjectionResult project_2d(const Tensor<double>& features, const std::string& backend, std::uint64_t seed,
                            std::vector<PointMeta> meta, const NeighborEmbeddingParams& params) {
  if (features.rank() != 2) throw ContractError("projection input must be (N, d), got " + to_string(features.shape()));
  const auto n = features.dim(0), d = features.dim(1);
  if (n < 10 || d < 2) {
    throw ContractError("projection needs N >= 10 and d >= 2, got " + to_string(features.shape()));
  }
  if (!meta.empty() && meta.size() != n) throw ContractError("projection metadata must have one entry per point");
  const Eigen::Map<const Matrix> x(features.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));

  ProjectionResult result;
  Matrix coords;
  if (backend == "principal-components" || backend == "pca") {
    result.backend = "principal-components";
    coords = pca_2d(x);
    result.params = nlohmann::json::object();
  } else if (backend == "neighbor-embedding" || backend == "tsne") {
    result.backend = "neighbor-embedding";
    coords = tsne_2d(x, seed, params);
    result.params = {{"method", "exact t-SNE"},
                     {"perplexity", std::min(params.perplexity, (static_cast<double>(n) - 1.0) / 3.0)},
                     {"iterations", params.iterations},
                     {"learning_rate", params.learning_rate},
                     {"early_exaggeration", params.early_exaggeration},
                     {"seed", seed}};
  } else {
    std::string names;
    for (const auto& b : available_backends()) names += (names.empty() ? "" : ", ") + b;
    throw ConfigError("unknown projection backend '" + backend + "'; available: " + names);
  }
  result.coords = Tensor<double>({n, 2}, std::vector<double>(coords.data(), coords.data() + coords.size()));
  for (double v : result.coords.values()) {
    if (!std::isfinite(v)) throw Error("projection produced non-finite coordinates");
  }
  if (meta.empty()) meta.resize(n);
  result.meta = std::move(meta);
  return result;
}

ProjectionResult project_latents(const nets::ModelBundle& bundle, const Dataset& dataset, Split split,
                                 metrics::LatentKind kind, const std::string& backend, std::uint64_t seed) {
  const auto records = dataset.split(split);
  const auto z = metrics::latent_features(bundle, dataset, kind)(records);
  std::vector<PointMeta> meta;
  for (const auto& r : records) meta.push_back(point_meta(r));
  return project_2d(nets::tensor_cast<double>(z), backend, seed, std::move(meta));
}

double domain_silhouette(const ProjectionResult& projection) {
  std::vector<int> labels;
  for (const auto& m : projection.meta) labels.push_back(m.domain);
  return metrics::silhouette_score(projection.coords, labels);
}

}  // namespace plseada::viz
