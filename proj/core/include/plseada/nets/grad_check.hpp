#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "plseada/nets/layers.hpp"

namespace plseada::nets {

enum class FiniteDifference { ForwardPair, Central };

struct GradCheckOptions {
  double step = 1e-5;
  FiniteDifference mode = FiniteDifference::Central;
  /// Entries sampled per parameter tensor (and from the input); 0 = all.
  std::size_t samples_per_tensor = 24;
  double epsilon = 1e-8;
  bool check_input = true;
  std::uint64_t seed = 7;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_path;
  std::size_t entries_checked = 0;
  double max_abs_analytic = 0.0;
  double max_abs_numeric = 0.0;
  bool finite = true;
  std::string failure;  // set when a gradient is non-finite

  bool passed(double tolerance) const { return finite && max_relative_error <= tolerance; }
};

/// Scalar loss of a component's output. When `grad` is non-null it must be
/// filled with dL/doutput (same shape as the output).
using ScalarLoss = std::function<double(const Tensor<double>& output, Tensor<double>* grad)>;

/// Compares back-propagated gradients of loss(component(input)) with finite
/// differences over a seeded sample of parameter (and input) entries.
/// Error per entry is |a - f| / (|a| + |f| + epsilon).
GradCheckResult grad_check(Layer<double>& component, const Tensor<double>& input,
                           const ScalarLoss& loss, const GradCheckOptions& options = {});

/// Same check for a function with an analytic input gradient (used for losses).
using DifferentiableFunction = std::function<double(const Tensor<double>& x, Tensor<double>* grad)>;
GradCheckResult grad_check_function(const DifferentiableFunction& fn, const Tensor<double>& input,
                                    const GradCheckOptions& options = {});

}  // namespace plseada::nets
