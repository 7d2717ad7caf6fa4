#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "plseada/core/error.hpp"
#include "plseada/datagen/dataset_generator.hpp"
#include "plseada/metrics/classification.hpp"
#include "plseada/metrics/evaluation.hpp"
#include "plseada/metrics/image_metrics.hpp"
#include "plseada/metrics/probe.hpp"
#include "plseada/metrics/protocol.hpp"
#include "plseada/metrics/report.hpp"

using namespace plseada;
using namespace plseada::metrics;
using nets::Tensor;

namespace {

std::vector<float> random_values(std::size_t n, std::mt19937_64& rng, float lo = 0.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> u(lo, hi);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

const Dataset& default_dataset() {
  static const Dataset ds = datagen::generate_dataset(datagen::DatasetSpec{});
  return ds;
}

const Dataset& tiny_dataset() {
  static const Dataset ds = [] {
    datagen::DatasetSpec spec;
    spec.train_subjects_per_cell = 4;
    spec.test_subjects_per_cell = 2;
    spec.shape = {1, 32, 32};
    return datagen::generate_dataset(spec);
  }();
  return ds;
}

/// One scalar per record computed by `f`, then standardized with fixed constants.
FeatureSource scalar_source(const Dataset& ds, std::function<double(const Image&)> f, double mean, double sd) {
  return [&ds, f, mean, sd](std::span<const SubjectRecord> records) {
    Tensor<float> out({records.size(), 1});
    for (std::size_t i = 0; i < records.size(); ++i)
      out[i] = static_cast<float>((f(ds.load_image(records[i])) - mean) / sd);
    return out;
  };
}

std::pair<double, double> train_moments(const Dataset& ds, const std::function<double(const Image&)>& f) {
  std::vector<double> v;
  for (const auto& r : ds.split(Split::Train)) v.push_back(f(ds.load_image(r)));
  const auto [m, var] = oracle::moments(v);
  return {m, std::sqrt(var)};
}

double ventricle_feature(const Image& img) {
  return oracle::ventricle_area(img.values().data(), img.height(), img.width(), 0.25f);
}

double intensity_feature(const Image& img) { return oracle::mean_intensity(img.values().data(), img.size()); }

FeatureSource random_source(std::uint64_t seed) {
  return [seed](std::span<const SubjectRecord> records) {
    Tensor<float> out({records.size(), 8});
    for (std::size_t i = 0; i < records.size(); ++i) {
      std::mt19937_64 rng(derive_seed(seed, hash_string(records[i].subject_id)));
      std::normal_distribution<float> g(0.0f, 1.0f);
      for (std::size_t j = 0; j < 8; ++j) out[i * 8 + j] = g(rng);
    }
    return out;
  };
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

EvalConfig quick_eval() {
  EvalConfig c;
  c.probe_epochs = 20;
  return c;
}

}  // namespace

TEST(Rmse, AnalyticCases) {
  std::vector<float> zero(16, 0.0f), half(16, 0.5f);
  EXPECT_EQ(rmse(zero, zero), 0.0);
  EXPECT_DOUBLE_EQ(rmse(zero, half), 0.5);
  std::vector<float> short_v(15);
  EXPECT_THROW(rmse(zero, short_v), ContractError);
  EXPECT_THROW(rmse(Image::zeros({1, 4, 4}), Image::zeros({1, 2, 8})), ContractError);
}

TEST(Rmse, MatchesOracleOnRandomInstances) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 500;
    auto a = random_values(n, rng, -2.0f, 2.0f), b = random_values(n, rng, -2.0f, 2.0f);
    EXPECT_NEAR(rmse(a, b), oracle::rmse(a, b), 1e-7);
  }
}

TEST(MacroF1, HandComputedCases) {
  const std::vector<int> p{0, 0, 1, 1}, l{0, 1, 0, 1};
  EXPECT_DOUBLE_EQ(macro_f1(p, l, 2), 0.5);
  EXPECT_DOUBLE_EQ(macro_f1(l, l, 2), 1.0);
  // Class 2 never appears: it contributes 0.
  EXPECT_NEAR(macro_f1(l, l, 3), 2.0 / 3.0, 1e-15);
  std::vector<int> none;
  EXPECT_THROW(macro_f1(none, none, 2), EmptyInputError);
  const std::vector<int> three{0, 1, 0};
  EXPECT_THROW(macro_f1(three, l, 2), ContractError);
  const std::vector<int> out_of_range{0, 1, 2, 0};
  EXPECT_THROW(macro_f1(out_of_range, l, 2), ContractError);
}

TEST(MacroF1, MatchesConfusionMatrixOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 4);
    const std::size_t n = trial < 20 ? 200 : 1 + rng() % 300;
    std::vector<int> p(n), l(n);
    for (std::size_t i = 0; i < n; ++i) {
      l[i] = static_cast<int>(rng() % k);
      p[i] = rng() % 3 == 0 ? static_cast<int>(rng() % k) : l[i];
    }
    EXPECT_NEAR(macro_f1(p, l, k), oracle::macro_f1(p, l, k), 1e-9);
  }
}

TEST(Ssim, IdentityIsOne) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto v = random_values(32 * 32, rng);
    EXPECT_NEAR(ssim(v, v, {1, 32, 32}), 1.0, 1e-12);
  }
  const auto vol = random_values(2 * 12 * 12 * 12, rng);
  EXPECT_NEAR(ssim(vol, vol, {2, 12, 12, 12}), 1.0, 1e-12);
}

TEST(Ssim, SymmetricAndBounded) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_values(24 * 20, rng), b = random_values(24 * 20, rng);
    const double ab = ssim(a, b, {1, 24, 20});
    EXPECT_NEAR(ab, ssim(b, a, {1, 24, 20}), 1e-9);
    EXPECT_GE(ab, -1.0);
    EXPECT_LE(ab, 1.0);
  }
}

TEST(Ssim, ConstantImagesMatchClosedForm) {
  for (auto [a, b] : {std::pair{0.3, 0.35}, {0.5, 0.9}, {0.0, 0.1}, {0.7, 0.2}}) {
    std::vector<float> x(16 * 16, float(a)), y(16 * 16, float(b));
    const double expected = oracle::ssim_constant(double(float(a)), double(float(b)), 1.0);
    EXPECT_NEAR(ssim(x, y, {1, 16, 16}), expected, 1e-6) << a << " vs " << b;
  }
}

TEST(Ssim, InferredDynamicRange) {
  std::vector<float> x(16 * 16, 2.0f), y(16 * 16, 4.0f);
  y[0] = 0.0f;  // data range 4
  SsimParams p;
  p.dynamic_range = 0.0;
  const double inferred = ssim(x, y, {1, 16, 16}, p);
  p.dynamic_range = 4.0;
  EXPECT_DOUBLE_EQ(inferred, ssim(x, y, {1, 16, 16}, p));
}

TEST(Ssim, ImageSmallerThanWindowRaises) {
  std::vector<float> v(10 * 10);
  EXPECT_THROW(ssim(v, v, {1, 10, 10}), ContractError);
  EXPECT_THROW(ssim(Image::zeros({1, 16, 16}), Image::zeros({1, 16, 17})), ContractError);
}

TEST(Ssim, GaussianWindowIsNormalisedAndSymmetric) {
  const auto w = gaussian_window(11, 1.5);
  double s = 0.0;
  for (double v : w) s += v;
  EXPECT_NEAR(s, 1.0, 1e-15);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(w[i], w[10 - i]);
  EXPECT_GT(w[5], w[4]);
}

TEST(Silhouette, SeparatedClustersScoreHigh) {
  Tensor<double> pts({40, 2});
  std::vector<int> labels(40);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.1);
  for (std::size_t i = 0; i < 40; ++i) {
    labels[i] = static_cast<int>(i % 2);
    pts[2 * i] = 10.0 * labels[i] + g(rng);
    pts[2 * i + 1] = g(rng);
  }
  EXPECT_GT(silhouette_score(pts, labels), 0.95);
  std::vector<int> one(40, 0);
  EXPECT_THROW(silhouette_score(pts, one), ContractError);
}

TEST(Silhouette, MatchesHandComputedValue) {
  // Points 0, 1 in cluster A and 4 in cluster B on a line.
  Tensor<double> pts({3, 1}, {0.0, 1.0, 4.0});
  const std::vector<int> labels{0, 0, 1};
  // s0 = (4 - 1) / 4, s1 = (3 - 1) / 3, s2 = 0 (singleton).
  EXPECT_NEAR(silhouette_score(pts, labels), (0.75 + 2.0 / 3.0 + 0.0) / 3.0, 1e-12);
}

TEST(Probe, SeparableBlobsReachPerfectTrainingF1) {
  Tensor<float> x({100, 4});
  std::vector<int> y(100);
  std::mt19937_64 rng(6);
  std::normal_distribution<float> g(0.0f, 0.3f);
  for (std::size_t i = 0; i < 100; ++i) {
    y[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < 4; ++j) x[i * 4 + j] = (y[i] ? 2.0f : -2.0f) + g(rng);
  }
  const auto probe = train_probe(x, y, 2);
  EXPECT_GE(macro_f1(probe.predict(x), y, 2), 0.99);
  ProbeConfig c;
  EXPECT_EQ(c.hidden, 128u);
  EXPECT_EQ(kDiseaseProbeHidden, 128u);
  EXPECT_EQ(kDomainProbeHidden, 32u);
}

TEST(Probe, SameSeedGivesIdenticalParameters) {
  Tensor<float> x({30, 3});
  std::vector<int> y(30);
  std::mt19937_64 rng(7);
  for (std::size_t i = 0; i < 30; ++i) {
    y[i] = static_cast<int>(i % 3);
    for (std::size_t j = 0; j < 3; ++j) x[i * 3 + j] = float(rng() % 100) / 50.0f;
  }
  ProbeConfig c;
  c.epochs = 10;
  auto a = train_probe(x, y, 3, c), b = train_probe(x, y, 3, c);
  auto pa = a.network().parameters(), pb = b.network().parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
}

TEST(Probe, SingleClassAndLengthMismatchRaise) {
  Tensor<float> x({4, 2});
  const std::vector<int> one{1, 1, 1, 1}, three{0, 1, 0};
  EXPECT_THROW(train_probe(x, one, 2), EmptyInputError);
  EXPECT_THROW(train_probe(x, three, 2), ContractError);
}

TEST(Protocol, DomainProbeOnlyTouchesCnOncePerSubject) {
  const auto& ds = tiny_dataset();
  ProbeOptions opt;
  opt.probe.epochs = 5;
  std::map<Split, std::set<std::string>> seen;
  std::size_t touched = 0;
  opt.audit = [&](const SubjectRecord& r, Split s) {
    EXPECT_EQ(r.diagnosis, Diagnosis::CN);
    EXPECT_EQ(r.split, s);
    EXPECT_TRUE(seen[s].insert(r.subject_id).second) << r.subject_id << " used twice";
    ++touched;
  };
  const auto out = evaluate_domain(ds, random_source(1), opt);
  EXPECT_EQ(touched, out.train_count + out.test_count);
  EXPECT_EQ(out.train_count, std::size_t(2 * 4));
  EXPECT_EQ(out.test_count, std::size_t(2 * 2));
}

TEST(Protocol, DiseaseProbeUsesOnlyAdAndCnOncePerSubject) {
  const auto& ds = tiny_dataset();
  ProbeOptions opt;
  opt.probe.epochs = 5;
  std::map<Split, std::set<std::string>> seen;
  opt.audit = [&](const SubjectRecord& r, Split s) {
    EXPECT_NE(r.diagnosis, Diagnosis::MCI);
    EXPECT_EQ(r.split, s);
    EXPECT_TRUE(seen[s].insert(r.subject_id).second) << r.subject_id << " used twice";
  };
  const auto out = evaluate_disease(ds, random_source(2), opt);
  EXPECT_EQ(out.train_count, std::size_t(2 * 2 * 4));
  EXPECT_EQ(out.test_count, std::size_t(2 * 2 * 2));
}

TEST(Protocol, MissingClassesAreProtocolErrors) {
  const auto& ds = tiny_dataset();
  std::vector<SubjectRecord> no_ad;
  for (const auto& r : ds.records())
    if (r.diagnosis != Diagnosis::AD) no_ad.push_back(r);
  const Dataset without_ad(no_ad, 2, ds.image_shape(), ds.domain_names(), 0, Provenance::Synthetic);
  EXPECT_THROW(evaluate_disease(without_ad, random_source(3)), ContractError);

  std::vector<SubjectRecord> cn_one_domain;
  for (const auto& r : ds.records())
    if (r.diagnosis != Diagnosis::CN || r.domain == 0) cn_one_domain.push_back(r);
  const Dataset skewed(cn_one_domain, 2, ds.image_shape(), ds.domain_names(), 0, Provenance::Synthetic);
  EXPECT_THROW(evaluate_domain(skewed, random_source(4)), ContractError);
}

TEST(Protocol, VentricleOracleFeaturesSolveDisease) {
  const auto& ds = default_dataset();
  const auto [m, s] = train_moments(ds, ventricle_feature);
  EXPECT_GE(evaluate_disease(ds, scalar_source(ds, ventricle_feature, m, s)).f1, 0.95);
}

TEST(Protocol, IntensityOracleFeaturesSolveDomain) {
  const auto& ds = default_dataset();
  const auto [m, s] = train_moments(ds, intensity_feature);
  EXPECT_GE(evaluate_domain(ds, scalar_source(ds, intensity_feature, m, s)).f1, 0.9);
}

TEST(Protocol, RandomFeaturesGiveChanceLevel) {
  const auto& ds = default_dataset();
  double disease = 0.0, domain = 0.0;
  const int repeats = 5;
  for (int i = 0; i < repeats; ++i) {
    disease += evaluate_disease(ds, random_source(100 + i)).f1;
    domain += evaluate_domain(ds, random_source(200 + i)).f1;
  }
  EXPECT_NEAR(disease / repeats, 0.5, 0.15);
  EXPECT_NEAR(domain / repeats, 0.5, 0.15);
}

TEST(Protocol, FeatureTransformsSeeBothSplits) {
  const auto& ds = tiny_dataset();
  ProbeOptions opt;
  opt.probe.epochs = 2;
  std::size_t calls = 0;
  opt.transform = [&](ProbeData& d) {
    ++calls;
    EXPECT_EQ(d.train_features.dim(0), d.train_records.size());
    EXPECT_EQ(d.test_features.dim(0), d.test_records.size());
  };
  evaluate_domain(ds, random_source(5), opt);
  EXPECT_EQ(calls, 1u);

  ProbeData d{ds.split(Split::Train), Tensor<float>({ds.split(Split::Train).size(), 3}, 1.0f),
              ds.split(Split::Test), Tensor<float>({ds.split(Split::Test).size(), 3}, 1.0f)};
  const auto before = d.train_features;
  noise_transform(0.1, 9)(d);
  EXPECT_NE(d.train_features, before);
}

TEST(Report, FlagsPerRow) {
  const auto cae = flags_for("cae");
  EXPECT_TRUE(cae.latent_available);
  EXPECT_FALSE(cae.z_d_available);
  EXPECT_FALSE(flags_for("combat").latent_available);
  EXPECT_TRUE(flags_for("se-ada").z_d_available);
  EXPECT_FALSE(flags_for("se-ada").interpretable);
  const auto pl = flags_for("pl-se-ada");
  EXPECT_TRUE(pl.latent_available && pl.z_d_available && pl.interpretable);
  EXPECT_THROW(flags_for("unknown"), ContractError);
}

TEST(Report, CsvHeaderAndNotAvailableCells) {
  EXPECT_EQ(csv_header(), "model,rmse,ssim,disease_f1,domain_f1,latent_available,z_d_available,interpretable");
  MetricsReport r;
  r.model_name = "noise";
  r.disease_f1 = 0.75;
  r.domain_f1 = 0.5;
  r.flags = flags_for("noise");
  EXPECT_EQ(to_csv_row(r), "noise,n/a,n/a,0.750000,0.500000,yes,no,no");
  const auto doc = to_json(r);
  EXPECT_EQ(doc.at("rmse"), "n/a");
  const auto back = metrics_report_from_json(doc);
  EXPECT_FALSE(back.rmse.has_value());
  EXPECT_EQ(to_json(back), doc);
}

TEST(Report, ValidationRejectsOutOfRange) {
  MetricsReport r;
  r.model_name = "cae";
  r.rmse = 0.1;
  r.ssim = 0.9;
  r.disease_f1 = 0.8;
  r.domain_f1 = 0.9;
  EXPECT_NO_THROW(r.validate());
  auto bad = r;
  bad.rmse = -1.0;
  EXPECT_THROW(bad.validate(), ContractError);
  bad = r;
  bad.ssim = 1.5;
  EXPECT_THROW(bad.validate(), ContractError);
  bad = r;
  bad.domain_f1 = 1.2;
  EXPECT_THROW(bad.validate(), ContractError);
}

TEST(Report, TextTableIsPlain) {
  MetricsReport r;
  r.model_name = "pl-se-ada";
  r.rmse = 0.1;
  r.ssim = 0.7;
  r.disease_f1 = 0.9;
  r.domain_f1 = 0.6;
  r.alpha = 0.2;
  r.flags = flags_for("pl-se-ada");
  const auto table = to_text_table({r});
  EXPECT_NE(table.find("pl-se-ada"), std::string::npos);
  EXPECT_EQ(table.find("**"), std::string::npos);
  EXPECT_EQ(table.find("<b>"), std::string::npos);
}

TEST(EvalConfig, DefaultsAndJson) {
  EvalConfig c;
  EXPECT_EQ(c.probe_epochs, 200);
  EXPECT_DOUBLE_EQ(c.probe_lr, 1e-3);
  EXPECT_DOUBLE_EQ(c.ssim.dynamic_range, 1.0);
  EXPECT_EQ(c.ssim.window, 11u);
  EXPECT_EQ(to_json(eval_config_from_json(to_json(c))), to_json(c));
  EXPECT_THROW(eval_config_from_json({{"bogus", 1}}), ConfigError);
}

TEST(Evaluation, ModelRowIsCompleteAndRepeatable) {
  const auto& ds = tiny_dataset();
  const auto bundle = nets::ModelBundle::create(tiny_net(), nets::ModelKind::PlSeAda, 3);
  const auto a = evaluate_model(bundle, ds, quick_eval(), 0.2, 7);
  const auto b = evaluate_model(bundle, ds, quick_eval(), 0.2, 7);
  EXPECT_EQ(to_json(a.report), to_json(b.report));
  EXPECT_TRUE(a.report.rmse.has_value());
  EXPECT_TRUE(a.z_d_prime_domain_f1.has_value());
  EXPECT_EQ(a.report.model_name, "pl-se-ada");
  EXPECT_NO_THROW(a.report.validate());

  const auto q = reconstruction_quality(bundle, ds, Split::Test, 0.2);
  EXPECT_EQ(q.images, ds.split(Split::Test).size());
  EXPECT_DOUBLE_EQ(q.rmse, *a.report.rmse);
}

TEST(Evaluation, FeatureBaselinesReportNotAvailableReconstruction) {
  const auto& ds = tiny_dataset();
  const auto cae = nets::ModelBundle::create(tiny_net(), nets::ModelKind::Cae, 4);
  for (const std::string method : {"noise", "combat"}) {
    const auto r = evaluate_feature_baseline(cae, ds, method, quick_eval(), 7);
    EXPECT_EQ(r.model_name, method);
    EXPECT_FALSE(r.rmse.has_value());
    EXPECT_FALSE(r.ssim.has_value());
  }
  EXPECT_THROW(evaluate_feature_baseline(cae, ds, "other", quick_eval(), 7), ConfigError);
  const auto pl = nets::ModelBundle::create(tiny_net(), nets::ModelKind::PlSeAda, 4);
  EXPECT_THROW(evaluate_feature_baseline(pl, ds, "noise", quick_eval(), 7), ContractError);
}
