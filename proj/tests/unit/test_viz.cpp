#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "plseada/core/error.hpp"
#include "plseada/datagen/dataset_generator.hpp"
#include "plseada/harmonizers/reconstruct.hpp"
#include "plseada/metrics/classification.hpp"
#include "plseada/viz/figures.hpp"
#include "plseada/viz/png.hpp"
#include "plseada/viz/projection.hpp"

namespace fs = std::filesystem;
using namespace plseada;
using namespace plseada::viz;
using nets::Tensor;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "plseada_viz_tests";
  fs::create_directories(dir);
  return dir / name;
}

nets::NetworkConfig tiny_net() {
  nets::NetworkConfig c;
  c.d_u = 10;
  c.encoder_channels = {4, 4};
  c.style_channels = {2, 2};
  c.decoder_channels = {4, 4};
  c.predictor_hidden = 8;
  c.image_shape = {1, 32, 32};
  return c;
}

std::vector<Image> some_images(std::size_t n) {
  datagen::DatasetSpec spec;
  spec.train_subjects_per_cell = 1;
  spec.test_subjects_per_cell = 1;
  spec.images_per_subject = 1;
  spec.shape = {1, 32, 32};
  const auto ds = datagen::generate_dataset(spec);
  std::vector<Image> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(ds.load_image(ds.records().at(i)));
  return out;
}

Tensor<double> two_clusters(std::size_t n, std::size_t d, double distance, std::vector<int>& labels,
                            std::uint64_t seed) {
  Tensor<double> x({n, d});
  labels.assign(n, 0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < d; ++j) x[i * d + j] = g(rng) + (j == 0 && labels[i] ? distance : 0.0);
  }
  return x;
}

}  // namespace

TEST(Png, RoundTripGrayAndRgb) {
  for (std::size_t c : {1u, 3u}) {
    Raster r(7, 5, c);
    for (std::size_t i = 0; i < r.pixels.size(); ++i) r.pixels[i] = static_cast<std::uint8_t>(i * 13);
    const auto path = scratch("roundtrip" + std::to_string(c) + ".png");
    write_png(r, path);
    const auto back = read_png(path);
    EXPECT_EQ(back.width, 7u);
    EXPECT_EQ(back.height, 5u);
    EXPECT_EQ(back.channels, c);
    EXPECT_EQ(back.pixels, r.pixels);
  }
  EXPECT_THROW(read_png("/nonexistent/file.png"), MissingArtifact);
}

TEST(EdgeEnergy, FlatImageHasNoneAndEdgesHaveSome) {
  EXPECT_EQ(edge_energy(Image::filled({1, 16, 16}, 0.4f)), 0.0);
  std::vector<float> v(16 * 16, 0.0f);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 8; x < 16; ++x) v[y * 16 + x] = 1.0f;
  EXPECT_GT(edge_energy(Image({1, 16, 16}, v)), 0.0);
  // A linear ramp has zero Laplacian everywhere.
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x) v[y * 16 + x] = 0.1f * float(x) + 0.05f * float(y);
  EXPECT_NEAR(edge_energy(Image({1, 16, 16}, v)), 0.0, 1e-10);
}

TEST(PercentileStretch, MapsRangeToFullScale) {
  std::vector<float> v(101);
  for (std::size_t i = 0; i <= 100; ++i) v[i] = 0.01f * float(i);
  const auto out = percentile_stretch(v);
  EXPECT_EQ(out.front(), 0);
  EXPECT_EQ(out.back(), 255);
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_GE(out[i], out[i - 1]);
  const std::vector<float> flat(10, 0.3f);
  for (auto p : percentile_stretch(flat)) EXPECT_EQ(p, percentile_stretch(flat).front());
}

TEST(ReconstructionGrid, ComposesExactlyAndWritesSidecar) {
  const auto bundle = nets::ModelBundle::create(tiny_net(), nets::ModelKind::PlSeAda, 1);
  const auto images = some_images(3);
  const auto path = scratch("grid.png");
  const auto grid = emit_reconstruction_grid(bundle, images, 0.2, path);
  ASSERT_EQ(grid.rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LE(grid.rows[i].composition_error, 1e-5);
    double err = 0.0;
    for (std::size_t j = 0; j < grid.x_prime[i].size(); ++j)
      err = std::max(err, std::abs(double(grid.x_prime[i][j]) -
                                   (double(grid.x_u[i][j]) + 0.2 * double(grid.x_d[i][j]))));
    EXPECT_LE(err, 1e-5);
  }
  const auto png = read_png(path);
  EXPECT_GT(png.width, 4u * 32u);
  std::ifstream in(path.string() + ".json");
  const auto doc = nlohmann::json::parse(in);
  EXPECT_EQ(doc.at("rows").size(), 3u);
  EXPECT_EQ(doc.at("x_d_rendering"), "percentile stretch [2, 98]");
}

TEST(ReconstructionGrid, RequiresPlSeAdaBundle) {
  const auto se = nets::ModelBundle::create(tiny_net(), nets::ModelKind::SeAda, 1);
  EXPECT_THROW(emit_reconstruction_grid(se, some_images(1), 0.2, scratch("bad.png")), ContractError);
}

TEST(AlphaStrip, DefaultsMonotoneAndAlphaZeroPanel) {
  EXPECT_EQ(default_alphas(), (std::vector<double>{0.05, 0.1, 0.2, 0.5, 1.0, 1.5}));
  const auto bundle = nets::ModelBundle::create(tiny_net(), nets::ModelKind::PlSeAda, 2);
  const auto image = some_images(1).front();
  std::vector<double> alphas{0.0};
  alphas.insert(alphas.end(), default_alphas().begin(), default_alphas().end());
  const auto path = scratch("strip.png");
  const auto strip = emit_alpha_strip(bundle, image, alphas, path);
  ASSERT_EQ(strip.panels.size(), alphas.size());
  for (std::size_t i = 1; i < alphas.size(); ++i)
    EXPECT_GE(strip.mean_abs_alpha_x_d[i], strip.mean_abs_alpha_x_d[i - 1]);
  const auto x_u = harmonizers::reconstruct_pl_se_ada(bundle, image, 0.0).x_u();
  EXPECT_TRUE(std::equal(x_u.values().begin(), x_u.values().end(), strip.panels[0].values().begin()));
  std::ifstream in(path.string() + ".json");
  EXPECT_EQ(nlohmann::json::parse(in).at("panels").size(), alphas.size());

  const std::vector<double> descending{0.5, 0.2};
  EXPECT_THROW(emit_alpha_strip(bundle, image, descending, path), ContractError);
  EXPECT_THROW(emit_alpha_strip(bundle, image, std::vector<double>{}, path), ContractError);
}

TEST(Projection, PrincipalComponentsRecoverPlanarData) {
  const std::size_t n = 40, d = 6;
  Tensor<double> x({n, d});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::vector<double> e1{1, 1, 0, 0, 1, 0}, e2{0, 1, -1, 2, 0, 1};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 3.0 * g(rng), b = g(rng);
    for (std::size_t j = 0; j < d; ++j) x[i * d + j] = 0.5 + a * e1[j] + b * e2[j];
  }
  const auto p = project_2d(x, "principal-components", 1);
  ASSERT_EQ(p.coords.shape(), (Shape{n, 2}));
  // Least-squares map from the 2D coords (plus intercept) back to the data is exact.
  for (std::size_t j = 0; j < d; ++j) {
    double s[3][3] = {}, t[3] = {};
    for (std::size_t i = 0; i < n; ++i) {
      const double f[3] = {1.0, p.coords[2 * i], p.coords[2 * i + 1]};
      for (int r = 0; r < 3; ++r) {
        t[r] += f[r] * x[i * d + j];
        for (int c = 0; c < 3; ++c) s[r][c] += f[r] * f[c];
      }
    }
    // Coords are centred and uncorrelated, so the normal equations are diagonal.
    const double c0 = t[0] / s[0][0], c1 = t[1] / s[1][1], c2 = t[2] / s[2][2];
    EXPECT_NEAR(s[0][1], 0.0, 1e-8);
    EXPECT_NEAR(s[1][2], 0.0, 1e-8);
    for (std::size_t i = 0; i < n; ++i)
      EXPECT_NEAR(c0 + c1 * p.coords[2 * i] + c2 * p.coords[2 * i + 1], x[i * d + j], 1e-6);
  }
}

TEST(Projection, SeparatedClustersUnderBothBackends) {
  std::vector<int> labels;
  const auto x = two_clusters(400, 5, 10.0, labels, 4);
  for (const std::string backend : {"principal-components", "neighbor-embedding"}) {
    const auto p = project_2d(x, backend, 5);
    EXPECT_GE(metrics::silhouette_score(p.coords, labels), 0.8) << backend;
    for (double v : p.coords.values()) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Projection, DeterministicPerSeedAndAliases) {
  std::vector<int> labels;
  const auto x = two_clusters(30, 4, 3.0, labels, 6);
  NeighborEmbeddingParams params;
  params.iterations = 300;
  params.perplexity = 8.0;
  const auto a = project_2d(x, "tsne", 11, {}, params);
  const auto b = project_2d(x, "neighbor-embedding", 11, {}, params);
  EXPECT_EQ(a.coords, b.coords);
  EXPECT_EQ(project_2d(x, "pca", 1).coords, project_2d(x, "principal-components", 1).coords);
}

TEST(Projection, RejectsUnknownBackendAndTinyInputs) {
  std::vector<int> labels;
  const auto x = two_clusters(12, 3, 3.0, labels, 7);
  try {
    project_2d(x, "umap", 1);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& name : available_backends()) EXPECT_NE(msg.find(name), std::string::npos);
  }
  EXPECT_THROW(project_2d(Tensor<double>({9, 3}), "pca", 1), ContractError);
  EXPECT_THROW(project_2d(Tensor<double>({12, 1}), "pca", 1), ContractError);
}

TEST(Scatter, CsvHasOneRowPerPointAndRoundTrips) {
  std::vector<int> labels;
  const auto x = two_clusters(20, 3, 5.0, labels, 8);
  std::vector<PointMeta> meta;
  for (std::size_t i = 0; i < 20; ++i)
    meta.push_back({labels[i], i % 3 == 0 ? Diagnosis::AD : Diagnosis::CN, "subj,\"" + std::to_string(i)});
  const auto p = project_2d(x, "pca", 1, meta);
  const auto png = scratch("scatter.png");
  const auto csv = emit_scatter(p, ColorBy::Domain, png);
  EXPECT_TRUE(fs::exists(png));
  std::ifstream in(csv);
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "x,y,domain,diagnosis,subject_id");
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 20u);

  const auto back = read_scatter_csv(csv);
  EXPECT_EQ(back.coords, p.coords);
  ASSERT_EQ(back.meta.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(back.meta[i].subject_id, meta[i].subject_id);
    EXPECT_EQ(back.meta[i].domain, meta[i].domain);
    EXPECT_EQ(back.meta[i].diagnosis, meta[i].diagnosis);
  }
  EXPECT_DOUBLE_EQ(domain_silhouette(back), domain_silhouette(p));
  EXPECT_NO_THROW(emit_scatter(back, ColorBy::Diagnosis, scratch("scatter_dx.png")));
}
