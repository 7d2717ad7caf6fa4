#pragma once

#include <array>
#include <cstdint>

#include "plseada/core/dataset.hpp"
#include "plseada/core/image.hpp"
#include "plseada/core/random.hpp"

namespace plseada::datagen {

/// Per-scan positioning noise; small so the anatomy stays centred.
struct ShapeJitter {
  double center_x = 0.0;  // fraction of width
  double center_y = 0.0;  // fraction of height
  double aspect = 1.0;
  double rotation = 0.0;  // radians
};

/// Anatomy of one synthetic subject. Disease lives here and only here:
/// atrophy enlarges the central ventricle and deepens cortical grooves.
struct PhantomParams {
  double brain_radius = 0.38;  // fraction of image size
  double atrophy = 0.0;        // [0, 1]
  double fold_frequency = 9.0;
  double fold_phase = 0.0;
  ShapeJitter jitter;
};

/// Site/scanner intensity model. A pure per-pixel map, so it never moves
/// tissue boundaries.
struct DomainEffect {
  double intensity_gain = 1.0;
  /// c0 + cx*u + cy*v + cxx*u^2 + cxy*u*v + cyy*v^2 with u, v in [-1, 1].
  std::array<double, 6> bias_field{};
  double gamma = 1.0;
  double noise_sigma = 0.0;
};

/// Tissue intensities of the noiseless phantom.
inline constexpr float kBackground = 0.0f;
inline constexpr float kVentricle = 0.05f;
inline constexpr float kSulcus = 0.40f;
inline constexpr float kGrayMatter = 0.60f;
inline constexpr float kWhiteMatter = 0.78f;
/// Threshold separating tissue from background/CSF in every shipped domain.
inline constexpr float kTissueThreshold = 0.3f;

/// Diagnosis-specific atrophy range: CN [0, 0.15], MCI [0.2, 0.45], AD [0.5, 0.9].
std::pair<double, double> atrophy_range(Diagnosis diagnosis);

/// Ventricle semi-axes (fractions of width/height) as a function of atrophy.
std::pair<double, double> ventricle_semi_axes(const PhantomParams& params);

/// Renders a 2D phantom with values in [0, 1]. Shape must be (1, H, W) with
/// H, W >= 32; anything else raises ConfigError.
Image generate_phantom(const PhantomParams& params, const Shape& shape);

/// clamp(gamma_curve(gain * x + bias) + noise, 0, 1). The all-neutral effect
/// returns the input bit for bit. gamma <= 0 raises ConfigError.
Image apply_domain_effect(const Image& image, const DomainEffect& effect, std::uint64_t seed);

/// Shipped presets "domain0" (k = 0) and "domain1" (k = K - 1); intermediate
/// domains interpolate linearly between them.
DomainEffect default_domain_effect(int domain, int num_domains);

/// Draws subject anatomy for a diagnosis.
PhantomParams sample_subject_params(Diagnosis diagnosis, Rng& rng);

/// Re-draws only the positioning jitter, keeping the subject's anatomy.
PhantomParams rescan(const PhantomParams& subject, Rng& rng);

}  // namespace plseada::datagen
