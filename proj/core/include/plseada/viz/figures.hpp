#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "plseada/core/image.hpp"
#include "plseada/nets/network.hpp"
#include "plseada/viz/projection.hpp"

namespace plseada::viz {

/// Variance of the 4-neighbour Laplacian over interior pixels, averaged
/// across channels and slices.
double edge_energy(std::span<const float> values, const Shape& shape);
double edge_energy(const Image& image);

/// Maps values to 0..255, stretching the [lo, hi] percentile range.
std::vector<std::uint8_t> percentile_stretch(std::span<const float> values, double lo = 2.0,
                                             double hi = 98.0);

struct PanelStats {
  double min = 0.0, max = 0.0, mean = 0.0, edge_energy = 0.0;
};

struct GridRow {
  PanelStats x, x_u, x_d, x_prime;
  /// max |x' - (x_u + alpha * x_d)| over the row.
  double composition_error = 0.0;
};

struct ReconstructionGrid {
  double alpha = 0.0;
  std::vector<GridRow> rows;
  std::vector<Image> x_u, x_d, x_prime;
};

/// Rows of [x, x_u, x_d (percentile-stretched), x_u + alpha * x_d]. Writes
/// `out_path` (PNG) and `out_path` + ".json". Needs a PL-SE-ADA bundle.
ReconstructionGrid emit_reconstruction_grid(const nets::ModelBundle& bundle, std::span<const Image> images,
                                            double alpha, const std::filesystem::path& out_path);

inline const std::vector<double>& default_alphas() {
  static const std::vector<double> alphas = {0.05, 0.1, 0.2, 0.5, 1.0, 1.5};
  return alphas;
}

struct AlphaStrip {
  std::vector<double> alphas;
  std::vector<double> mean_intensity;
  std::vector<double> mean_abs_alpha_x_d;
  std::vector<Image> panels;
};

/// One panel per alpha of x_u + alpha * x_d. Alphas must be non-empty and
/// ascending. Writes the PNG and a ".json" sidecar.
AlphaStrip emit_alpha_strip(const nets::ModelBundle& bundle, const Image& image,
                            std::span<const double> alphas, const std::filesystem::path& out_path);

enum class ColorBy { Domain, Diagnosis };

/// Scatter plot with legend at `out_path` and a CSV of
/// (x, y, domain, diagnosis, subject_id) next to it; returns the CSV path.
std::filesystem::path emit_scatter(const ProjectionResult& projection, ColorBy color_by,
                                   const std::filesystem::path& out_path);

/// Reads a scatter CSV back into a projection (backend "csv").
ProjectionResult read_scatter_csv(const std::filesystem::path& path);

}  // namespace plseada::viz
