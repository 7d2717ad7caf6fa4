#include "plseada/viz/figures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "font.hpp"
#include "plseada/core/error.hpp"
#include "plseada/harmonizers/reconstruct.hpp"
#include "plseada/viz/png.hpp"

namespace plseada::viz {

using nlohmann::json;

double edge_energy(std::span<const float> values, const Shape& shape) {
  validate_image_shape(shape);
  if (values.size() != element_count(shape)) throw ContractError("edge_energy: value count does not match shape");
  const std::size_t h = shape[shape.size() - 2], w = shape.back();
  if (h < 3 || w < 3) throw ContractError("edge_energy: image must be at least 3x3");
  const std::size_t planes = values.size() / (h * w);
  double total = 0.0;
  for (std::size_t p = 0; p < planes; ++p) {
    const float* v = values.data() + p * h * w;
    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (std::size_t y = 1; y + 1 < h; ++y) {
      for (std::size_t x = 1; x + 1 < w; ++x) {
        const double lap = static_cast<double>(v[(y - 1) * w + x]) + v[(y + 1) * w + x] + v[y * w + x - 1] +
                           v[y * w + x + 1] - 4.0 * static_cast<double>(v[y * w + x]);
        sum += lap;
        sum2 += lap * lap;
        ++n;
      }
    }
    const double mean = sum / static_cast<double>(n);
    total += sum2 / static_cast<double>(n) - mean * mean;
  }
  return total / static_cast<double>(planes);
}

double edge_energy(const Image& image) { return edge_energy(image.values(), image.shape()); }

namespace {

double percentile(std::vector<float> sorted_copy, double q) {
  std::sort(sorted_copy.begin(), sorted_copy.end());
  const double pos = q / 100.0 * static_cast<double>(sorted_copy.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const auto j = std::min(i + 1, sorted_copy.size() - 1);
  return sorted_copy[i] + (pos - static_cast<double>(i)) * (sorted_copy[j] - sorted_copy[i]);
}

std::vector<std::uint8_t> to_gray(std::span<const float> values) {
  std::vector<std::uint8_t> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [](float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  });
  return out;
}

PanelStats stats_of(const Image& image) {
  return {image.min(), image.max(), image.mean(), edge_energy(image)};
}

json to_json(const PanelStats& s) {
  return {{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"edge_energy", s.edge_energy}};
}

// Shows the first channel (and first slice of volumes) of a panel.
void blit(Raster& canvas, std::span<const std::uint8_t> gray, std::size_t h, std::size_t w,
          std::size_t x0, std::size_t y0) {
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) *canvas.at(x0 + x, y0 + y) = gray[y * w + x];
  }
}

std::span<const float> first_plane(const Image& image) {
  return image.values().subspan(0, image.height() * image.width());
}

void require_pl(const nets::ModelBundle& bundle) {
  if (bundle.kind() != nets::ModelKind::PlSeAda) {
    throw ContractError("model '" + std::string(nets::to_string(bundle.kind())) +
                        "' has no image-space decomposition; a pl-se-ada bundle is required");
  }
}

void write_json(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw MissingArtifact("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::filesystem::path sidecar(const std::filesystem::path& out_path, const char* ext) {
  auto p = out_path;
  p += ext;
  return p;
}

constexpr std::size_t kGap = 2;

}  // namespace

std::vector<std::uint8_t> percentile_stretch(std::span<const float> values, double lo, double hi) {
  if (values.empty()) return {};
  if (!(lo >= 0.0 && lo < hi && hi <= 100.0)) throw ContractError("percentile_stretch: need 0 <= lo < hi <= 100");
  std::vector<float> copy(values.begin(), values.end());
  const double a = percentile(copy, lo), b = percentile(std::move(copy), hi);
  std::vector<std::uint8_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = b > a ? (values[i] - a) / (b - a) : 0.5;
    out[i] = static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
  }
  return out;
}

ReconstructionGrid emit_reconstruction_grid(const nets::ModelBundle& bundle, std::span<const Image> images,
                                            double alpha, const std::filesystem::path& out_path) {
  require_pl(bundle);
  if (images.empty()) throw EmptyInputError("reconstruction grid needs at least one image");
  ReconstructionGrid grid;
  grid.alpha = alpha;
  const std::size_t h = images[0].height(), w = images[0].width();
  Raster canvas(4 * w + 3 * kGap, images.size() * h + (images.size() - 1) * kGap, 1, 255);
  json rows = json::array();
  for (std::size_t r = 0; r < images.size(); ++r) {
    const auto dec = harmonizers::reconstruct_pl_se_ada(bundle, images[r], alpha);
    GridRow row{stats_of(images[r]), stats_of(dec.x_u()), stats_of(dec.x_d()), stats_of(dec.x_prime()), 0.0};
    const auto a = static_cast<float>(alpha);
    for (std::size_t i = 0; i < dec.x_prime().values().size(); ++i) {
      const double expected = dec.x_u().values()[i] + a * dec.x_d().values()[i];
      row.composition_error = std::max(row.composition_error, std::abs(dec.x_prime().values()[i] - expected));
    }
    const std::size_t y0 = r * (h + kGap);
    blit(canvas, to_gray(first_plane(images[r])), h, w, 0, y0);
    blit(canvas, to_gray(first_plane(dec.x_u())), h, w, w + kGap, y0);
    blit(canvas, percentile_stretch(first_plane(dec.x_d())), h, w, 2 * (w + kGap), y0);
    blit(canvas, to_gray(first_plane(dec.x_prime())), h, w, 3 * (w + kGap), y0);
    rows.push_back({{"x", to_json(row.x)},
                    {"x_u", to_json(row.x_u)},
                    {"x_d", to_json(row.x_d)},
                    {"x_prime", to_json(row.x_prime)},
                    {"composition_error", row.composition_error}});
    grid.rows.push_back(row);
    grid.x_u.push_back(dec.x_u());
    grid.x_d.push_back(dec.x_d());
    grid.x_prime.push_back(dec.x_prime());
  }
  write_png(canvas, out_path);
  write_json({{"alpha", alpha},
              {"columns", {"x", "x_u", "x_d", "x_u + alpha*x_d"}},
              {"x_d_rendering", "percentile stretch [2, 98]"},
              {"rows", rows}},
             sidecar(out_path, ".json"));
  return grid;
}

AlphaStrip emit_alpha_strip(const nets::ModelBundle& bundle, const Image& image, std::span<const double> alphas,
                            const std::filesystem::path& out_path) {
  require_pl(bundle);
  if (alphas.empty()) throw ContractError("alpha strip needs at least one alpha");
  if (!std::is_sorted(alphas.begin(), alphas.end())) throw ContractError("alphas must be ascending");
  AlphaStrip strip;
  const auto base = harmonizers::reconstruct_pl_se_ada(bundle, image, 0.0);
  const std::size_t h = image.height(), w = image.width();
  Raster canvas(alphas.size() * w + (alphas.size() - 1) * kGap, h, 1, 255);
  json panels = json::array();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const Decomposition dec(base.x_u(), base.x_d(), alphas[i]);
    double abs_sum = 0.0;
    for (float v : dec.x_d().values()) abs_sum += std::abs(static_cast<double>(static_cast<float>(alphas[i]) * v));
    const double mean_abs = abs_sum / static_cast<double>(dec.x_d().values().size());
    strip.alphas.push_back(alphas[i]);
    strip.mean_intensity.push_back(dec.x_prime().mean());
    strip.mean_abs_alpha_x_d.push_back(mean_abs);
    strip.panels.push_back(dec.x_prime());
    blit(canvas, to_gray(first_plane(dec.x_prime())), h, w, i * (w + kGap), 0);
    panels.push_back({{"alpha", alphas[i]}, {"mean_intensity", dec.x_prime().mean()}, {"mean_abs_alpha_x_d", mean_abs}});
  }
  write_png(canvas, out_path);
  write_json({{"panels", panels}}, sidecar(out_path, ".json"));
  return strip;
}

namespace {

constexpr std::array<std::array<std::uint8_t, 3>, 8> kPalette = {{
    {31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40},
    {148, 103, 189}, {140, 86, 75}, {227, 119, 194}, {127, 127, 127},
}};

void fill_rect(Raster& c, long x0, long y0, long w, long h, const std::array<std::uint8_t, 3>& rgb) {
  for (long y = std::max(0L, y0); y < std::min<long>(static_cast<long>(c.height), y0 + h); ++y) {
    for (long x = std::max(0L, x0); x < std::min<long>(static_cast<long>(c.width), x0 + w); ++x) {
      auto* px = c.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      px[0] = rgb[0];
      px[1] = rgb[1];
      px[2] = rgb[2];
    }
  }
}

void draw_text(Raster& c, long x0, long y0, const std::string& text) {
  for (char raw : text) {
    const char ch = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
    const auto it = std::find_if(detail::kFont.begin(), detail::kFont.end(), [ch](const auto& g) { return g.ch == ch; });
    if (it != detail::kFont.end()) {
      for (long r = 0; r < 7; ++r) {
        for (long col = 0; col < 5; ++col) {
          if (it->rows[static_cast<std::size_t>(r)] & (0x10 >> col)) fill_rect(c, x0 + col, y0 + r, 1, 1, {0, 0, 0});
        }
      }
    }
    x0 += 6;
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

}  // namespace

std::filesystem::path emit_scatter(const ProjectionResult& projection, ColorBy color_by,
                                   const std::filesystem::path& out_path) {
  const auto n = projection.coords.rank() == 2 ? projection.coords.dim(0) : 0;
  if (n == 0 || projection.coords.dim(1) != 2 || projection.meta.size() != n) {
    throw ContractError("scatter needs (N, 2) coordinates with N metadata entries");
  }
  auto category = [&](const PointMeta& m) {
    return color_by == ColorBy::Domain ? m.domain : static_cast<int>(m.diagnosis);
  };
  auto label = [&](int c) {
    return color_by == ColorBy::Domain ? "domain " + std::to_string(c)
                                       : std::string(to_string(static_cast<Diagnosis>(c)));
  };

  constexpr long kSize = 480, kMargin = 24;
  Raster canvas(kSize, kSize, 3, 255);
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (std::size_t i = 0; i < n; ++i) {
    xmin = std::min(xmin, projection.coords[2 * i]);
    xmax = std::max(xmax, projection.coords[2 * i]);
    ymin = std::min(ymin, projection.coords[2 * i + 1]);
    ymax = std::max(ymax, projection.coords[2 * i + 1]);
  }
  const double sx = xmax > xmin ? (kSize - 2 * kMargin) / (xmax - xmin) : 0.0;
  const double sy = ymax > ymin ? (kSize - 2 * kMargin) / (ymax - ymin) : 0.0;
  std::map<int, std::size_t> categories;
  for (const auto& m : projection.meta) categories.emplace(category(m), 0);
  std::size_t idx = 0;
  for (auto& [_, slot] : categories) slot = idx++ % kPalette.size();
  for (std::size_t i = 0; i < n; ++i) {
    const long px = kMargin + std::lround((projection.coords[2 * i] - xmin) * sx);
    const long py = kSize - kMargin - std::lround((projection.coords[2 * i + 1] - ymin) * sy);
    fill_rect(canvas, px - 2, py - 2, 5, 5, kPalette[categories[category(projection.meta[i])]]);
  }
  long ly = 6;
  for (const auto& [c, slot] : categories) {
    fill_rect(canvas, kSize - 110, ly, 7, 7, kPalette[slot]);
    draw_text(canvas, kSize - 98, ly, label(c));
    ly += 11;
  }
  write_png(canvas, out_path);

  auto csv_path = out_path;
  csv_path.replace_extension(".csv");
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw MissingArtifact("cannot write " + csv_path.string());
  out.precision(17);
  out << "x,y,domain,diagnosis,subject_id\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = projection.meta[i];
    out << projection.coords[2 * i] << ',' << projection.coords[2 * i + 1] << ',' << m.domain << ','
        << to_string(m.diagnosis) << ',' << csv_field(m.subject_id) << '\n';
  }
  return csv_path;
}

ProjectionResult read_scatter_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "x,y,domain,diagnosis,subject_id") throw ConfigError(path.string() + ": unexpected scatter CSV header");
  std::vector<double> coords;
  ProjectionResult result;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (quoted) {
        if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else if (ch == '"') {
          quoted = false;
        } else {
          field += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else {
        field += ch;
      }
    }
    fields.push_back(std::move(field));
    if (fields.size() != 5) throw ConfigError(path.string() + ": malformed scatter CSV row");
    coords.push_back(std::stod(fields[0]));
    coords.push_back(std::stod(fields[1]));
    result.meta.push_back({std::stoi(fields[2]), parse_diagnosis(fields[3]), fields[4]});
  }
  result.coords = nets::Tensor<double>({result.meta.size(), 2}, std::move(coords));
  result.backend = "csv";
  result.params = json::object();
  return result;
}

}  // namespace plseada::viz
