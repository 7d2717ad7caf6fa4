#include "plseada/harmonizers/combat.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <Eigen/Dense>

#include "plseada/core/error.hpp"
#include "plseada/core/random.hpp"

namespace plseada::harmonizers {

using nets::Tensor;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace {

Eigen::Map<const Matrix> as_matrix(const Tensor<double>& t) {
  if (t.rank() != 2) throw ContractError("expected an (N, d) matrix, got " + to_string(t.shape()));
  return {t.data(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1))};
}

void check_covariates(const Tensor<double>* covariates, std::size_t n) {
  if (covariates && (covariates->rank() != 2 || covariates->dim(0) != n)) {
    throw ContractError("covariates must be (N, C) with N = " + std::to_string(n));
  }
}

double sample_variance(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

// Per-sample standardisation mean: grand mean plus covariate contribution.
Matrix stand_mean(const CombatModel& m, std::size_t n, const Tensor<double>* covariates) {
  const auto d = static_cast<Eigen::Index>(m.num_features);
  Eigen::RowVectorXd grand = Eigen::Map<const Eigen::RowVectorXd>(m.grand_mean.data(), d);
  Matrix out = grand.replicate(static_cast<Eigen::Index>(n), 1);
  if (m.num_covariates > 0) {
    const auto c = as_matrix(*covariates);
    Eigen::Map<const Matrix> coef(m.covariate_coef.data(), static_cast<Eigen::Index>(m.num_covariates), d);
    out += c * coef;
  }
  return out;
}

}  // namespace

CombatModel combat_fit(const Tensor<double>& features, std::span<const int> site,
                       const Tensor<double>* covariates, const CombatOptions& options) {
  const auto x = as_matrix(features);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  if (n == 0 || d == 0) throw EmptyInputError("ComBat needs a non-empty feature matrix");
  if (site.size() != n) throw ContractError("site labels must have one entry per sample");
  check_covariates(covariates, n);

  CombatModel model;
  model.num_features = d;
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n; ++i) members[site[i]].push_back(i);
  for (const auto& [s, idx] : members) {
    if (idx.size() < 2) {
      throw ContractError("ComBat needs at least 2 samples per site; site " + std::to_string(s) +
                          " has " + std::to_string(idx.size()));
    }
    model.sites.push_back(s);
  }
  const auto num_sites = model.sites.size();
  const std::size_t num_cov = covariates ? covariates->dim(1) : 0;
  model.num_covariates = num_cov;

  if (num_sites == 1 && num_cov == 0) {
    model.identity = true;
    model.grand_mean.assign(d, 0.0);
    model.pooled_variance.assign(d, 1.0);
    model.gamma_hat.assign(d, 0.0);
    model.delta_hat.assign(d, 1.0);
    model.gamma_star = model.gamma_hat;
    model.delta_star = model.delta_hat;
    return model;
  }

  // OLS on [site indicators | covariates].
  const auto p = static_cast<Eigen::Index>(num_sites + num_cov);
  Matrix design = Matrix::Zero(static_cast<Eigen::Index>(n), p);
  for (std::size_t k = 0; k < num_sites; ++k) {
    for (auto i : members[model.sites[k]]) design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = 1.0;
  }
  if (num_cov > 0) design.rightCols(static_cast<Eigen::Index>(num_cov)) = as_matrix(*covariates);
  const Matrix beta = design.colPivHouseholderQr().solve(Matrix(x));

  Eigen::RowVectorXd grand = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < num_sites; ++k) {
    const double w = static_cast<double>(members[model.sites[k]].size()) / static_cast<double>(n);
    grand += w * beta.row(static_cast<Eigen::Index>(k));
  }
  model.grand_mean.assign(grand.data(), grand.data() + d);
  if (num_cov > 0) {
    const Matrix coef = beta.bottomRows(static_cast<Eigen::Index>(num_cov));
    model.covariate_coef.assign(coef.data(), coef.data() + coef.size());
  }

  const Matrix resid = x - design * beta;
  Eigen::RowVectorXd var = resid.array().square().colwise().sum() / static_cast<double>(n);
  model.pooled_variance.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double v = var(static_cast<Eigen::Index>(j));
    model.pooled_variance[j] = v > 0.0 ? v : 1.0;
  }
  const Eigen::Map<const Eigen::RowVectorXd> pooled(model.pooled_variance.data(), static_cast<Eigen::Index>(d));

  const Matrix standardized =
      ((x - stand_mean(model, n, covariates)).array().rowwise() / pooled.array().sqrt()).matrix();

  model.gamma_hat.assign(num_sites * d, 0.0);
  model.delta_hat.assign(num_sites * d, 0.0);
  model.gamma_star.assign(num_sites * d, 0.0);
  model.delta_star.assign(num_sites * d, 0.0);
  constexpr double kMinDelta = 1e-12;

  for (std::size_t k = 0; k < num_sites; ++k) {
    const auto& idx = members[model.sites[k]];
    const auto nk = static_cast<double>(idx.size());
    Matrix block(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      block.row(static_cast<Eigen::Index>(r)) = standardized.row(static_cast<Eigen::Index>(idx[r]));
    }
    Eigen::VectorXd g_hat(static_cast<Eigen::Index>(d)), d_hat(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
      const Eigen::VectorXd col = block.col(static_cast<Eigen::Index>(j));
      g_hat(static_cast<Eigen::Index>(j)) = col.mean();
      d_hat(static_cast<Eigen::Index>(j)) = std::max(sample_variance(col), kMinDelta);
    }
    std::copy_n(g_hat.data(), d, model.gamma_hat.begin() + static_cast<std::ptrdiff_t>(k * d));
    std::copy_n(d_hat.data(), d, model.delta_hat.begin() + static_cast<std::ptrdiff_t>(k * d));

    if (!options.empirical_bayes) {
      std::copy_n(g_hat.data(), d, model.gamma_star.begin() + static_cast<std::ptrdiff_t>(k * d));
      std::copy_n(d_hat.data(), d, model.delta_star.begin() + static_cast<std::ptrdiff_t>(k * d));
      continue;
    }

    // Normal prior on gamma, inverse-gamma prior on delta (method of moments).
    const double g_bar = g_hat.mean();
    const double t2 = sample_variance(g_hat);
    const double m = d_hat.mean();
    const double s2 = sample_variance(d_hat);
    const bool point_delta = !(s2 > 1e-300);
    const double a = point_delta ? 0.0 : (2.0 * s2 + m * m) / s2;
    const double b = point_delta ? 0.0 : (m * s2 + m * m * m) / s2;

    Eigen::VectorXd g_old = g_hat, d_old = d_hat, g_new(g_hat.size()), d_new(d_hat.size());
    for (int it = 0; it < options.max_iterations; ++it) {
      for (Eigen::Index j = 0; j < g_hat.size(); ++j) {
        g_new(j) = (nk * t2 * g_hat(j) + d_old(j) * g_bar) / (nk * t2 + d_old(j));
        if (point_delta) {
          d_new(j) = m;
        } else {
          const double sum2 = (block.col(j).array() - g_new(j)).square().sum();
          d_new(j) = std::max((b + 0.5 * sum2) / (nk / 2.0 + a - 1.0), kMinDelta);
        }
      }
      double change = 0.0;
      for (Eigen::Index j = 0; j < g_hat.size(); ++j) {
        if (g_old(j) != 0.0) change = std::max(change, std::abs(g_new(j) - g_old(j)) / std::abs(g_old(j)));
        change = std::max(change, std::abs(d_new(j) - d_old(j)) / d_old(j));
      }
      g_old = g_new;
      d_old = d_new;
      if (change < options.tolerance) break;
    }
    std::copy_n(g_old.data(), d, model.gamma_star.begin() + static_cast<std::ptrdiff_t>(k * d));
    std::copy_n(d_old.data(), d, model.delta_star.begin() + static_cast<std::ptrdiff_t>(k * d));
  }
  return model;
}

Tensor<double> combat_apply(const CombatModel& model, const Tensor<double>& features,
                            std::span<const int> site, const Tensor<double>* covariates) {
  const auto x = as_matrix(features);
  const auto n = static_cast<std::size_t>(x.rows());
  if (static_cast<std::size_t>(x.cols()) != model.num_features) {
    throw ContractError("feature dimension " + std::to_string(x.cols()) + " differs from the fitted " +
                        std::to_string(model.num_features));
  }
  if (site.size() != n) throw ContractError("site labels must have one entry per sample");
  if (model.identity) {
    for (auto s : site) {
      if (s != model.sites.front()) throw ContractError("site " + std::to_string(s) + " was not seen during fit");
    }
    return features;
  }
  if ((model.num_covariates > 0) != (covariates != nullptr)) {
    throw ContractError("covariates must be given at apply time iff they were given at fit time");
  }
  check_covariates(covariates, n);
  if (covariates && covariates->dim(1) != model.num_covariates) {
    throw ContractError("covariate count differs from the fitted model");
  }

  const auto d = model.num_features;
  const Matrix mean = stand_mean(model, n, covariates);
  Tensor<double> out(features.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = std::find(model.sites.begin(), model.sites.end(), site[i]);
    if (it == model.sites.end()) throw ContractError("site " + std::to_string(site[i]) + " was not seen during fit");
    const auto k = static_cast<std::size_t>(it - model.sites.begin());
    for (std::size_t j = 0; j < d; ++j) {
      const double sd = std::sqrt(model.pooled_variance[j]);
      const double mu = mean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double s = (features[i * d + j] - mu) / sd;
      const double adj = (s - model.gamma_star[k * d + j]) / std::sqrt(model.delta_star[k * d + j]);
      out[i * d + j] = adj * sd + mu;
    }
  }
  return out;
}

Tensor<float> noise_augment(const Tensor<float>& z, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw ConfigError("noise sigma must be >= 0");
  if (sigma == 0.0) return z;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  Tensor<float> out = z;
  for (auto& v : out.values()) v = static_cast<float>(v + normal(rng));
  return out;
}

}  // namespace plseada::harmonizers
