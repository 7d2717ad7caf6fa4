#include "plseada/datagen/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "plseada/core/error.hpp"

namespace plseada::datagen {

namespace {

double smoothstep(double edge0, double edge1, double x) {
  double t = std::clamp((x - edge0) / (edge1 - edge0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

ShapeJitter sample_jitter(Rng& rng) {
  ShapeJitter j;
  j.center_x = uniform(rng, -0.02, 0.02);
  j.center_y = uniform(rng, -0.02, 0.02);
  j.aspect = uniform(rng, 0.95, 1.05);
  j.rotation = uniform(rng, -0.08, 0.08);
  return j;
}

}  // namespace

std::pair<double, double> atrophy_range(Diagnosis diagnosis) {
  switch (diagnosis) {
    case Diagnosis::CN: return {0.0, 0.15};
    case Diagnosis::MCI: return {0.2, 0.45};
    case Diagnosis::AD: return {0.5, 0.9};
  }
  return {0.0, 0.0};
}

std::pair<double, double> ventricle_semi_axes(const PhantomParams& params) {
  double scale = params.brain_radius * (0.14 + 0.30 * params.atrophy);
  return {scale, 0.7 * scale};
}

Image generate_phantom(const PhantomParams& params, const Shape& shape) {
  if (shape.size() != 3 || shape[0] != 1) {
    throw ConfigError("phantoms are single-channel 2D: shape must be (1, H, W), got " +
                      to_string(shape));
  }
  const std::size_t height = shape[1];
  const std::size_t width = shape[2];
  if (height < 32 || width < 32) {
    throw ConfigError("phantom images need H, W >= 32, got " + to_string(shape));
  }
  if (params.atrophy < 0.0 || params.atrophy > 1.0) {
    throw ConfigError("atrophy must lie in [0, 1]");
  }

  const auto& j = params.jitter;
  const double ax = params.brain_radius * j.aspect;
  const double ay = params.brain_radius * 1.08 / j.aspect;
  const auto [vx, vy] = ventricle_semi_axes(params);
  const double groove_depth = 0.22 + 0.25 * params.atrophy;
  const double groove_open = 0.55 - 0.25 * params.atrophy;
  const double cos_r = std::cos(j.rotation);
  const double sin_r = std::sin(j.rotation);
  const double edge_px = std::min(ax * static_cast<double>(width), ay * static_cast<double>(height));

  std::vector<float> values(height * width, kBackground);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      double px = (static_cast<double>(x) + 0.5) / static_cast<double>(width) - 0.5 - j.center_x;
      double py = (static_cast<double>(y) + 0.5) / static_cast<double>(height) - 0.5 - j.center_y;
      double qx = cos_r * px + sin_r * py;
      double qy = -sin_r * px + cos_r * py;
      double ex = qx / ax;
      double ey = qy / ay;
      double rho = std::hypot(ex, ey);
      double inside = std::clamp((1.0 - rho) * edge_px, 0.0, 1.0);
      if (inside <= 0.0) continue;

      double tissue = kWhiteMatter + (kGrayMatter - kWhiteMatter) * smoothstep(0.55, 0.70, rho);
      double theta = std::atan2(ey, ex);
      double groove = smoothstep(groove_open, groove_open + 0.3,
                                 std::sin(params.fold_frequency * theta + params.fold_phase)) *
                      smoothstep(1.0 - groove_depth, 1.0 - groove_depth + 0.08, rho);
      tissue += (kSulcus - tissue) * groove;

      double rv = std::hypot(qx / vx, qy / vy);
      double vent_px = std::min(vx * static_cast<double>(width), vy * static_cast<double>(height));
      double in_vent = std::clamp((1.0 - rv) * vent_px + 0.5, 0.0, 1.0);
      tissue += (kVentricle - tissue) * in_vent;

      values[y * width + x] = static_cast<float>(std::clamp(tissue * inside, 0.0, 1.0));
    }
  }
  return Image(shape, std::move(values));
}

Image apply_domain_effect(const Image& image, const DomainEffect& effect, std::uint64_t seed) {
  if (!(effect.gamma > 0.0)) throw ConfigError("domain effect gamma must be > 0");
  if (effect.noise_sigma < 0.0) throw ConfigError("domain effect noise_sigma must be >= 0");

  const std::size_t height = image.height();
  const std::size_t width = image.width();
  const std::size_t plane = height * width;
  const auto& c = effect.bias_field;
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, effect.noise_sigma > 0.0 ? effect.noise_sigma : 1.0);

  auto in = image.values();
  std::vector<float> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const std::size_t y = (i % plane) / width;
    const std::size_t x = i % width;
    double u = 2.0 * (static_cast<double>(x) + 0.5) / static_cast<double>(width) - 1.0;
    double v = 2.0 * (static_cast<double>(y) + 0.5) / static_cast<double>(height) - 1.0;
    double bias = c[0] + c[1] * u + c[2] * v + c[3] * u * u + c[4] * u * v + c[5] * v * v;
    double value = std::max(effect.intensity_gain * static_cast<double>(in[i]) + bias, 0.0);
    if (effect.gamma != 1.0) value = std::pow(value, effect.gamma);
    if (effect.noise_sigma > 0.0) value += noise(rng);
    out[i] = static_cast<float>(std::clamp(value, 0.0, 1.0));
  }
  return Image(image.shape(), std::move(out), image.spacing());
}

DomainEffect default_domain_effect(int domain, int num_domains) {
  if (num_domains < 2 || domain < 0 || domain >= num_domains) {
    throw ConfigError("domain index out of range for default domain effects");
  }
  const DomainEffect d0{1.0, {0.02, 0.01, 0.0, 0.0, 0.0, 0.0}, 1.0, 0.02};
  const DomainEffect d1{1.25, {0.0, 0.03, -0.02, 0.02, 0.0, 0.02}, 0.8, 0.05};
  if (domain == 0) return d0;
  if (domain == num_domains - 1) return d1;
  const double t = static_cast<double>(domain) / static_cast<double>(num_domains - 1);
  auto lerp = [t](double a, double b) { return a + (b - a) * t; };
  DomainEffect e;
  e.intensity_gain = lerp(d0.intensity_gain, d1.intensity_gain);
  for (std::size_t i = 0; i < e.bias_field.size(); ++i) {
    e.bias_field[i] = lerp(d0.bias_field[i], d1.bias_field[i]);
  }
  e.gamma = lerp(d0.gamma, d1.gamma);
  e.noise_sigma = lerp(d0.noise_sigma, d1.noise_sigma);
  return e;
}

PhantomParams sample_subject_params(Diagnosis diagnosis, Rng& rng) {
  PhantomParams p;
  p.brain_radius = 0.38 * uniform(rng, 0.96, 1.04);
  auto [lo, hi] = atrophy_range(diagnosis);
  p.atrophy = uniform(rng, lo, hi);
  p.fold_frequency = uniform(rng, 7.0, 11.0);
  p.fold_phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  p.jitter = sample_jitter(rng);
  return p;
}

PhantomParams rescan(const PhantomParams& subject, Rng& rng) {
  PhantomParams p = subject;
  p.jitter = sample_jitter(rng);
  return p;
}

}  // namespace plseada::datagen
