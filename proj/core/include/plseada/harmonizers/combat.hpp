#pragma once

#include <optional>
#include <span>
#include <vector>

#include "plseada/nets/tensor.hpp"

namespace plseada::harmonizers {

struct CombatOptions {
  /// Empirical-Bayes shrinkage of the site effects; false uses the raw
  /// per-site estimates.
  bool empirical_bayes = true;
  double tolerance = 1e-4;
  int max_iterations = 1000;
};

/// Fitted location/scale site model. Per-feature arrays have length d;
/// per-site arrays are (sites x d), row order follows `sites`.
struct CombatModel {
  std::vector<int> sites;
  std::size_t num_features = 0;
  std::vector<double> grand_mean;
  std::vector<double> pooled_variance;
  /// (num_covariates x d) regression coefficients, empty without covariates.
  std::vector<double> covariate_coef;
  std::size_t num_covariates = 0;
  std::vector<double> gamma_hat, delta_hat;
  std::vector<double> gamma_star, delta_star;
  /// Single-site data: nothing to remove, apply() is the identity.
  bool identity = false;
};

/// Parametric empirical-Bayes ComBat fit. `covariates` is an optional
/// (N x C) matrix of biological covariates whose effects are preserved.
/// Requires every site to have at least 2 samples.
CombatModel combat_fit(const nets::Tensor<double>& features, std::span<const int> site,
                       const nets::Tensor<double>* covariates = nullptr,
                       const CombatOptions& options = {});

nets::Tensor<double> combat_apply(const CombatModel& model, const nets::Tensor<double>& features,
                                  std::span<const int> site,
                                  const nets::Tensor<double>* covariates = nullptr);

/// z + N(0, sigma^2) with a seeded generator; sigma 0 returns z unchanged.
nets::Tensor<float> noise_augment(const nets::Tensor<float>& z, double sigma, std::uint64_t seed);

}  // namespace plseada::harmonizers
