#include "plseada/nets/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plseada/core/random.hpp"

namespace plseada::nets {

namespace {

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (k == 0 || k >= n) return idx;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Shared comparison loop: perturbs `values[i]`, re-evaluates, restores.
template <typename Eval>
void compare(std::span<double> values, std::span<const double> analytic,
             const std::string& path, const Eval& eval, double base, const GradCheckOptions& opt,
             Rng& rng, GradCheckResult& result) {
  for (auto i : sample_indices(values.size(), opt.samples_per_tensor, rng)) {
    const double a = analytic[i];
    const double saved = values[i];
    double numeric;
    if (opt.mode == FiniteDifference::Central) {
      values[i] = saved + opt.step;
      const double up = eval();
      values[i] = saved - opt.step;
      const double down = eval();
      numeric = (up - down) / (2.0 * opt.step);
    } else {
      values[i] = saved + opt.step;
      numeric = (eval() - base) / opt.step;
    }
    values[i] = saved;

    const std::string entry = path + "[" + std::to_string(i) + "]";
    if (!std::isfinite(a) || !std::isfinite(numeric)) {
      if (result.finite) result.failure = "non-finite gradient at " + entry;
      result.finite = false;
      continue;
    }
    const double err = std::abs(a - numeric) / (std::abs(a) + std::abs(numeric) + opt.epsilon);
    ++result.entries_checked;
    result.max_abs_analytic = std::max(result.max_abs_analytic, std::abs(a));
    result.max_abs_numeric = std::max(result.max_abs_numeric, std::abs(numeric));
    if (err >= result.max_relative_error || result.worst_path.empty()) {
      result.max_relative_error = std::max(err, result.max_relative_error);
      result.worst_path = entry;
    }
  }
}

}  // namespace

GradCheckResult grad_check(Layer<double>& component, const Tensor<double>& input,
                           const ScalarLoss& loss, const GradCheckOptions& options) {
  GradCheckResult result;
  Rng rng(options.seed);

  component.zero_grad();
  const auto output = component.forward(input);
  Tensor<double> grad_out(output.shape());
  const double base = loss(output, &grad_out);
  const auto grad_in = component.backward(grad_out);

  Tensor<double> x = input;
  auto eval_params = [&] { return loss(component.apply(x), nullptr); };

  std::size_t k = 0;
  for (auto* p : component.parameters()) {
    const std::vector<double> analytic = p->grad.to_vector();
    compare(p->value.values(), analytic, "param" + std::to_string(k++) + "." + p->name,
            eval_params, base, options, rng, result);
  }
  if (options.check_input) {
    compare(x.values(), grad_in.values(), "input", eval_params, base, options, rng, result);
  }
  component.zero_grad();
  return result;
}

GradCheckResult grad_check_function(const DifferentiableFunction& fn, const Tensor<double>& input,
                                    const GradCheckOptions& options) {
  GradCheckResult result;
  Rng rng(options.seed);
  Tensor<double> x = input;
  Tensor<double> grad(x.shape());
  const double base = fn(x, &grad);
  auto eval = [&] { return fn(x, nullptr); };
  compare(x.values(), grad.values(), "input", eval, base, options, rng, result);
  return result;
}

}  // namespace plseada::nets
