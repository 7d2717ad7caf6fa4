#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "plseada/core/error.hpp"
#include "plseada/core/manifest.hpp"
#include "plseada/datagen/dataset_generator.hpp"
#include "plseada/datagen/phantom.hpp"

namespace fs = std::filesystem;
using namespace plseada;
using namespace plseada::datagen;

namespace {

constexpr float kDarkThreshold = 0.25f;

double area(const Image& img) {
  return oracle::ventricle_area(img.values().data(), img.height(), img.width(), kDarkThreshold);
}

const Dataset& default_dataset() {
  static const Dataset ds = generate_dataset(DatasetSpec{});
  return ds;
}

/// Best single-threshold classifier on train (either orientation), accuracy on test.
double threshold_accuracy(const std::vector<double>& train_x, const std::vector<int>& train_y,
                          const std::vector<double>& test_x, const std::vector<int>& test_y) {
  double best_t = 0.0;
  int best_sign = 1;
  std::size_t best_correct = 0;
  for (double t : train_x) {
    for (int sign : {1, -1}) {
      std::size_t correct = 0;
      for (std::size_t i = 0; i < train_x.size(); ++i)
        correct += static_cast<int>(sign * (train_x[i] - t) > 0) == train_y[i];
      if (correct > best_correct) {
        best_correct = correct;
        best_t = t;
        best_sign = sign;
      }
    }
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test_x.size(); ++i)
    correct += static_cast<int>(best_sign * (test_x[i] - best_t) > 0) == test_y[i];
  return double(correct) / double(test_x.size());
}

}  // namespace

TEST(Phantom, VentricleGrowsWithAtrophy) {
  PhantomParams lo, hi;
  lo.atrophy = 0.0;
  hi.atrophy = 0.9;
  const auto a = generate_phantom(lo, {1, 64, 64});
  const auto b = generate_phantom(hi, {1, 64, 64});
  EXPECT_GT(area(b), area(a));

  double prev = -1.0;
  for (double at = 0.0; at <= 1.0; at += 0.1) {
    PhantomParams p;
    p.atrophy = at;
    const double axes = ventricle_semi_axes(p).first;
    EXPECT_GT(axes, prev);
    prev = axes;
  }
}

TEST(Phantom, DeterministicAndInRange) {
  PhantomParams p;
  p.atrophy = 0.5;
  p.fold_phase = 1.3;
  for (const Shape& shape : {Shape{1, 32, 32}, Shape{1, 64, 48}, Shape{1, 96, 96}}) {
    const auto a = generate_phantom(p, shape);
    const auto b = generate_phantom(p, shape);
    EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    EXPECT_GE(a.min(), 0.0f);
    EXPECT_LE(a.max(), 1.0f);
  }
}

TEST(Phantom, RejectsSmallOrNon2DShapes) {
  PhantomParams p;
  EXPECT_THROW(generate_phantom(p, {1, 31, 64}), ConfigError);
  EXPECT_THROW(generate_phantom(p, {1, 32, 32, 32}), ConfigError);
  EXPECT_THROW(generate_phantom(p, {2, 64, 64}), ConfigError);
}

TEST(Phantom, AtrophyRangesPerDiagnosis) {
  EXPECT_EQ(atrophy_range(Diagnosis::CN), std::make_pair(0.0, 0.15));
  EXPECT_EQ(atrophy_range(Diagnosis::MCI), std::make_pair(0.2, 0.45));
  EXPECT_EQ(atrophy_range(Diagnosis::AD), std::make_pair(0.5, 0.9));
  Rng rng(4);
  for (auto d : {Diagnosis::CN, Diagnosis::MCI, Diagnosis::AD})
    for (int i = 0; i < 100; ++i) {
      const auto p = sample_subject_params(d, rng);
      EXPECT_GE(p.atrophy, atrophy_range(d).first);
      EXPECT_LE(p.atrophy, atrophy_range(d).second);
    }
}

TEST(DomainEffect, NeutralEffectIsBitwiseIdentity) {
  PhantomParams p;
  const auto img = generate_phantom(p, {1, 64, 64});
  const auto out = apply_domain_effect(img, DomainEffect{}, 17);
  EXPECT_TRUE(std::equal(img.values().begin(), img.values().end(), out.values().begin()));
}

TEST(DomainEffect, GainRaisesMeanIntensity) {
  PhantomParams p;
  const auto img = generate_phantom(p, {1, 64, 64});
  DomainEffect e;
  e.intensity_gain = 1.3;
  const auto out = apply_domain_effect(img, e, 0);
  EXPECT_GT(oracle::mean_intensity(out.values().data(), out.size()),
            oracle::mean_intensity(img.values().data(), img.size()));
}

TEST(DomainEffect, SeededNoiseIsDeterministic) {
  PhantomParams p;
  const auto img = generate_phantom(p, {1, 64, 64});
  DomainEffect e;
  e.noise_sigma = 0.05;
  const auto a = apply_domain_effect(img, e, 123);
  const auto b = apply_domain_effect(img, e, 123);
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
}

TEST(DomainEffect, NonPositiveGammaRaises) {
  const auto img = Image::filled({1, 32, 32}, 0.5f);
  DomainEffect e;
  e.gamma = 0.0;
  EXPECT_THROW(apply_domain_effect(img, e, 0), ConfigError);
}

TEST(DomainEffect, ShippedPresetsPreserveTissueMask) {
  Rng rng(77);
  for (int k = 0; k < 2; ++k) {
    const auto effect = default_domain_effect(k, 2);
    for (int s = 0; s < 30; ++s) {
      const auto params = sample_subject_params(static_cast<Diagnosis>(s % 3), rng);
      const auto img = generate_phantom(params, {1, 64, 64});
      const auto out = apply_domain_effect(img, effect, static_cast<std::uint64_t>(s));
      std::size_t changed = 0;
      for (std::size_t i = 0; i < img.size(); ++i)
        changed += (img[i] > kTissueThreshold) != (out[i] > kTissueThreshold);
      EXPECT_LE(double(changed), 0.02 * double(img.size())) << "domain " << k << " subject " << s;
    }
  }
}

TEST(GenerateDataset, DefaultCounts) {
  const auto& ds = default_dataset();
  EXPECT_EQ(ds.split(Split::Train).size(), std::size_t(2 * 3 * 40 * 2));
  EXPECT_EQ(ds.split(Split::Test).size(), std::size_t(2 * 3 * 10 * 2));
  std::map<std::pair<int, Diagnosis>, int> cells;
  for (const auto& r : ds.split(Split::Train)) cells[{r.domain, r.diagnosis}] += 1;
  EXPECT_EQ(cells.size(), 6u);
  for (const auto& [cell, n] : cells) EXPECT_EQ(n, 80);
}

TEST(GenerateDataset, SubjectDisjointSplits) {
  std::map<std::string, std::set<Split>> splits;
  for (const auto& r : default_dataset().records()) splits[r.subject_id].insert(r.split);
  for (const auto& [id, s] : splits) EXPECT_EQ(s.size(), 1u) << id;
}

TEST(GenerateDataset, OneImagePerSubjectSpecIsIdentityForSelection) {
  DatasetSpec spec;
  spec.images_per_subject = 1;
  spec.train_subjects_per_cell = 3;
  spec.test_subjects_per_cell = 2;
  const auto ds = generate_dataset(spec);
  EXPECT_EQ(select_one_per_subject(ds, Split::Train, 5).size(), ds.split(Split::Train).size());
}

TEST(GenerateDataset, RejectsEmptyCellsAndSingleDomain) {
  DatasetSpec spec;
  spec.train_subjects_per_cell = 0;
  EXPECT_THROW(generate_dataset(spec), ConfigError);
  spec = DatasetSpec{};
  spec.num_domains = 1;
  EXPECT_THROW(generate_dataset(spec), ConfigError);
}

TEST(GenerateDataset, WrittenDirectoryIsBitwiseReproducible) {
  DatasetSpec spec;
  spec.train_subjects_per_cell = 2;
  spec.test_subjects_per_cell = 1;
  const fs::path a = fs::temp_directory_path() / "plseada_gen_a";
  const fs::path b = fs::temp_directory_path() / "plseada_gen_b";
  fs::remove_all(a);
  fs::remove_all(b);
  generate_dataset_to(spec, a);
  generate_dataset_to(spec, b);
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), a);
    std::ifstream fa(entry.path(), std::ios::binary), fb(b / rel, std::ios::binary);
    std::string ca((std::istreambuf_iterator<char>(fa)), {}), cb((std::istreambuf_iterator<char>(fb)), {});
    EXPECT_EQ(ca, cb) << rel;
    ++files;
  }
  EXPECT_EQ(files, std::size_t(2 * 3 * 3 * 2 + 1));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(GenerateDataset, SpecJsonRoundTrip) {
  DatasetSpec spec;
  spec.seed = 99;
  spec.images_per_subject = 3;
  const auto back = dataset_spec_from_json(to_json(spec));
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.images_per_subject, 3);
  EXPECT_EQ(to_json(back), to_json(spec));
}

TEST(GenerateDataset, VentricleAreaSeparatesDiseaseAcrossDomains) {
  std::vector<double> tx, ex;
  std::vector<int> ty, ey;
  const auto& ds = default_dataset();
  for (const auto& r : ds.records()) {
    if (r.diagnosis == Diagnosis::MCI) continue;
    const double a = area(ds.load_image(r));
    const int y = r.diagnosis == Diagnosis::AD;
    (r.split == Split::Train ? tx : ex).push_back(a);
    (r.split == Split::Train ? ty : ey).push_back(y);
  }
  EXPECT_GE(threshold_accuracy(tx, ty, ex, ey), 0.95);
}

TEST(GenerateDataset, MeanIntensitySeparatesDomainAcrossDiagnoses) {
  std::vector<double> tx, ex;
  std::vector<int> ty, ey;
  const auto& ds = default_dataset();
  for (const auto& r : ds.records()) {
    const auto img = ds.load_image(r);
    const double m = oracle::mean_intensity(img.values().data(), img.size());
    (r.split == Split::Train ? tx : ex).push_back(m);
    (r.split == Split::Train ? ty : ey).push_back(r.domain);
  }
  EXPECT_GE(threshold_accuracy(tx, ty, ex, ey), 0.9);
}
