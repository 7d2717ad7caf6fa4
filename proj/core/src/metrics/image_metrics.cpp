#include "plseada/metrics/image_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "plseada/core/error.hpp"

namespace plseada::metrics {

double rmse(std::span<const float> x, std::span<const float> x_prime) {
  if (x.size() != x_prime.size()) {
    throw ContractError("rmse: size mismatch " + std::to_string(x.size()) + " vs " +
                        std::to_string(x_prime.size()));
  }
  if (x.empty()) throw EmptyInputError("rmse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(x_prime[i]);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(x.size()));
}

double rmse(const Image& x, const Image& x_prime) {
  if (x.shape() != x_prime.shape()) {
    throw ContractError("rmse: shape mismatch " + to_string(x.shape()) + " vs " + to_string(x_prime.shape()));
  }
  return rmse(x.values(), x_prime.values());
}

std::vector<double> gaussian_window(std::size_t size, double sigma) {
  if (size == 0 || !(sigma > 0.0)) throw ConfigError("gaussian window needs size >= 1 and sigma > 0");
  std::vector<double> w(size);
  const double center = (static_cast<double>(size) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double t = static_cast<double>(i) - center;
    w[i] = std::exp(-t * t / (2.0 * sigma * sigma));
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

namespace {

// Volume stored as (D, H, W) row-major.
struct Volume {
  std::size_t d, h, w;
  std::vector<double> v;
};

// Valid-mode correlation of `in` with `kernel` along one axis.
Volume filter_axis(const Volume& in, const std::vector<double>& kernel, int axis) {
  const std::size_t k = kernel.size();
  Volume out{in.d, in.h, in.w, {}};
  if (axis == 0) out.d -= k - 1;
  if (axis == 1) out.h -= k - 1;
  if (axis == 2) out.w -= k - 1;
  out.v.assign(out.d * out.h * out.w, 0.0);
  const std::size_t step = axis == 0 ? in.h * in.w : axis == 1 ? in.w : 1;
  for (std::size_t z = 0; z < out.d; ++z) {
    for (std::size_t y = 0; y < out.h; ++y) {
      for (std::size_t x = 0; x < out.w; ++x) {
        const std::size_t base = (z * in.h + y) * in.w + x;
        double acc = 0.0;
        for (std::size_t t = 0; t < k; ++t) acc += kernel[t] * in.v[base + t * step];
        out.v[(z * out.h + y) * out.w + x] = acc;
      }
    }
  }
  return out;
}

Volume blur(Volume vol, const std::vector<double>& kernel, bool three_d) {
  vol = filter_axis(vol, kernel, 2);
  vol = filter_axis(vol, kernel, 1);
  if (three_d) vol = filter_axis(vol, kernel, 0);
  return vol;
}

}  // namespace

double ssim(std::span<const float> x, std::span<const float> y, const Shape& shape, const SsimParams& p) {
  validate_image_shape(shape);
  if (x.size() != y.size() || x.size() != element_count(shape)) {
    throw ContractError("ssim: inputs must both have shape " + to_string(shape));
  }
  const bool three_d = shape.size() == 4;
  const std::size_t channels = shape[0];
  const std::size_t d = three_d ? shape[1] : 1;
  const std::size_t h = shape[shape.size() - 2];
  const std::size_t w = shape[shape.size() - 1];
  if (h < p.window || w < p.window || (three_d && d < p.window)) {
    throw ContractError("ssim: image " + to_string(shape) + " is smaller than the " +
                        std::to_string(p.window) + "-wide window");
  }
  double range = p.dynamic_range;
  if (!(range > 0.0)) {
    const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
    const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
    range = static_cast<double>(std::max(*xmax, *ymax)) - static_cast<double>(std::min(*xmin, *ymin));
    if (!(range > 0.0)) range = 1.0;
  }
  const double c1 = (p.k1 * range) * (p.k1 * range);
  const double c2 = (p.k2 * range) * (p.k2 * range);
  const auto kernel = gaussian_window(p.window, p.sigma);

  const std::size_t plane = d * h * w;
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    Volume vx{d, h, w, std::vector<double>(plane)}, vy = vx, vxx = vx, vyy = vx, vxy = vx;
    for (std::size_t i = 0; i < plane; ++i) {
      const double a = x[c * plane + i];
      const double b = y[c * plane + i];
      vx.v[i] = a;
      vy.v[i] = b;
      vxx.v[i] = a * a;
      vyy.v[i] = b * b;
      vxy.v[i] = a * b;
    }
    const auto mx = blur(std::move(vx), kernel, three_d);
    const auto my = blur(std::move(vy), kernel, three_d);
    const auto mxx = blur(std::move(vxx), kernel, three_d);
    const auto myy = blur(std::move(vyy), kernel, three_d);
    const auto mxy = blur(std::move(vxy), kernel, three_d);
    for (std::size_t i = 0; i < mx.v.size(); ++i) {
      const double ux = mx.v[i], uy = my.v[i];
      const double sxx = mxx.v[i] - ux * ux;
      const double syy = myy.v[i] - uy * uy;
      const double sxy = mxy.v[i] - ux * uy;
      total += ((2.0 * ux * uy + c1) * (2.0 * sxy + c2)) / ((ux * ux + uy * uy + c1) * (sxx + syy + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double ssim(const Image& x, const Image& y, const SsimParams& params) {
  if (x.shape() != y.shape()) {
    throw ContractError("ssim: shape mismatch " + to_string(x.shape()) + " vs " + to_string(y.shape()));
  }
  return ssim(x.values(), y.values(), x.shape(), params);
}

}  // namespace plseada::metrics
