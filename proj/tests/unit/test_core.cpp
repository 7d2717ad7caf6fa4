#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>

#include "oracles.hpp"
#include "plseada/core/dataset.hpp"
#include "plseada/core/error.hpp"
#include "plseada/core/latent.hpp"
#include "plseada/core/manifest.hpp"

namespace fs = std::filesystem;
using namespace plseada;

namespace {

std::shared_ptr<const Image> small_image(float v) {
  return std::make_shared<const Image>(Image::filled({1, 4, 4}, v));
}

/// `subjects` subjects per (domain, split), `images` scans each.
Dataset toy_dataset(int subjects, int images, std::uint64_t seed = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> diag(0, 2);
  std::vector<SubjectRecord> records;
  for (int split = 0; split < 2; ++split)
    for (int d = 0; d < 2; ++d)
      for (int s = 0; s < subjects; ++s)
        for (int i = 0; i < images; ++i) {
          SubjectRecord r;
          r.subject_id = "s" + std::to_string(split) + "-" + std::to_string(d) + "-" + std::to_string(s);
          r.domain = d;
          r.diagnosis = static_cast<Diagnosis>(diag(rng));
          r.split = split == 0 ? Split::Train : Split::Test;
          r.image = small_image(static_cast<float>(i) * 0.1f);
          records.push_back(r);
        }
  return Dataset(records, 2, {1, 4, 4}, {"a", "b"}, seed, Provenance::Synthetic);
}

}  // namespace

TEST(Image, RejectsNonFiniteAndBadShapes) {
  EXPECT_THROW(Image({1, 2, 2}, {0, 0, 0, NAN}), ContractError);
  EXPECT_THROW(Image({4, 4}, std::vector<float>(16)), ContractError);
  EXPECT_THROW(Image({1, 2, 2}, std::vector<float>(3)), ContractError);
  EXPECT_NO_THROW(Image({1, 2, 3, 4}, std::vector<float>(24)));
}

TEST(Image, AccessorsAndStatistics) {
  Image img({1, 2, 3}, {0, 1, 2, 3, 4, 5});
  EXPECT_EQ(img.height(), 2u);
  EXPECT_EQ(img.width(), 3u);
  EXPECT_EQ(img.at(0, 1, 2), 5.0f);
  EXPECT_EQ(img.min(), 0.0f);
  EXPECT_EQ(img.max(), 5.0f);
  EXPECT_DOUBLE_EQ(img.mean(), 2.5);
}

TEST(Dataset, RejectsSubjectInBothSplits) {
  std::vector<SubjectRecord> records;
  for (int split = 0; split < 2; ++split)
    for (int d = 0; d < 2; ++d) {
      SubjectRecord r;
      r.subject_id = "shared-" + std::to_string(d);
      r.domain = d;
      r.split = split == 0 ? Split::Train : Split::Test;
      r.image = small_image(0.0f);
      records.push_back(r);
    }
  EXPECT_THROW(Dataset(records, 2, {1, 4, 4}, {"a", "b"}, 0, Provenance::Synthetic), ContractError);
}

TEST(Dataset, RejectsDomainOutOfRangeAndMissingCoverage) {
  auto ds = toy_dataset(2, 1);
  auto records = ds.records();
  records[0].domain = 2;
  EXPECT_THROW(Dataset(records, 2, {1, 4, 4}, {"a", "b"}, 0, Provenance::Synthetic), ContractError);

  std::vector<SubjectRecord> only_domain0;
  for (const auto& r : ds.records())
    if (r.domain == 0) only_domain0.push_back(r);
  EXPECT_THROW(Dataset(only_domain0, 2, {1, 4, 4}, {"a", "b"}, 0, Provenance::Synthetic), ContractError);
  EXPECT_THROW(Dataset(ds.records(), 1, {1, 4, 4}, {"a"}, 0, Provenance::Synthetic), ConfigError);
}

TEST(Dataset, SubjectDisjointness) {
  auto ds = toy_dataset(5, 3);
  std::map<std::string, std::set<Split>> splits;
  for (const auto& r : ds.records()) splits[r.subject_id].insert(r.split);
  for (const auto& [id, s] : splits) EXPECT_EQ(s.size(), 1u) << id;
}

TEST(SelectOnePerSubject, IdentityWhenOneImageEach) {
  auto ds = toy_dataset(4, 1);
  auto split = ds.split(Split::Train);
  auto picked = select_one_per_subject(ds, Split::Train, 11);
  ASSERT_EQ(picked.size(), split.size());
  for (std::size_t i = 0; i < split.size(); ++i) EXPECT_EQ(picked[i].subject_id, split[i].subject_id);
}

TEST(SelectOnePerSubject, DeterministicChoiceAmongThree) {
  auto ds = toy_dataset(3, 3);
  auto a = select_one_per_subject(ds, Split::Train, 5);
  auto b = select_one_per_subject(ds, Split::Train, 5);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].subject_id, b[i].subject_id);
    EXPECT_EQ(std::get<std::shared_ptr<const Image>>(a[i].image).get(),
              std::get<std::shared_ptr<const Image>>(b[i].image).get());
  }
}

TEST(SelectOnePerSubject, MatchesGroupByOracle) {
  // 10 subjects x 4 images in the train split.
  auto ds = toy_dataset(5, 4);
  auto split = ds.split(Split::Train);
  std::vector<std::string> ids;
  for (const auto& r : split) ids.push_back(r.subject_id);
  const auto expected = oracle::distinct_in_order(ids);
  ASSERT_EQ(expected.size(), 10u);

  auto picked = select_one_per_subject(ds, Split::Train, 99);
  ASSERT_EQ(picked.size(), expected.size());
  for (std::size_t i = 0; i < picked.size(); ++i) EXPECT_EQ(picked[i].subject_id, expected[i]);
}

TEST(SelectOnePerSubject, Idempotent) {
  auto ds = toy_dataset(4, 3);
  auto once = select_one_per_subject(ds, Split::Test, 8);
  auto twice = select_one_per_subject(std::span<const SubjectRecord>(once), 8);
  ASSERT_EQ(once.size(), twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(once[i].subject_id, twice[i].subject_id);
}

TEST(SelectOnePerSubject, EmptyInputRaises) {
  std::vector<SubjectRecord> none;
  EXPECT_THROW(select_one_per_subject(std::span<const SubjectRecord>(none), 1), EmptyInputError);
}

TEST(FilterRecords, IdentityWithAllPredicates) {
  auto ds = toy_dataset(3, 2);
  auto all = filter_records(ds, Split::Train, all_diagnoses(), ds.all_domains());
  auto split = ds.split(Split::Train);
  ASSERT_EQ(all.size(), split.size());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].subject_id, split[i].subject_id);
}

TEST(FilterRecords, MatchesListComprehensionOracle) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    auto ds = toy_dataset(7, 2, rng());  // 28 train + 28 test records
    std::set<Diagnosis> diagnoses;
    for (auto d : {Diagnosis::CN, Diagnosis::AD, Diagnosis::MCI})
      if (rng() % 2) diagnoses.insert(d);
    std::set<int> domains;
    for (int d : {0, 1})
      if (rng() % 2) domains.insert(d);
    auto got = filter_records(ds, Split::Test, diagnoses, domains);
    std::vector<std::string> expected;
    for (const auto& r : ds.records())
      if (r.split == Split::Test && diagnoses.count(r.diagnosis) && domains.count(r.domain))
        expected.push_back(r.subject_id + "/" + std::to_string(r.domain));
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      EXPECT_EQ(got[i].subject_id + "/" + std::to_string(got[i].domain), expected[i]);
  }
}

TEST(FilterRecords, DiseaseProbePoolIsTrainAdCn) {
  auto ds = toy_dataset(6, 1);
  auto pool = filter_records(ds, Split::Train, {Diagnosis::AD, Diagnosis::CN}, ds.all_domains());
  for (const auto& r : pool) {
    EXPECT_EQ(r.split, Split::Train);
    EXPECT_NE(r.diagnosis, Diagnosis::MCI);
  }
}

TEST(Decomposition, IdentityOnRandomInputs) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> n(0.0f, 3.0f);
  std::uniform_real_distribution<double> a(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<float> u(64), d(64);
    for (auto& v : u) v = n(rng);
    for (auto& v : d) v = n(rng);
    const double alpha = a(rng);
    Decomposition dec(Image({1, 8, 8}, u), Image({1, 8, 8}, d), alpha);
    double max_abs = 0.0, err = 0.0;
    for (std::size_t i = 0; i < 64; ++i) {
      const double expected = double(u[i]) + alpha * double(d[i]);
      max_abs = std::max(max_abs, std::abs(double(dec.x_prime()[i])));
      err = std::max(err, std::abs(double(dec.x_prime()[i]) - expected));
    }
    EXPECT_LE(err, 1e-5 * max_abs);
  }
}

TEST(Decomposition, RejectsNegativeAlphaAndShapeMismatch) {
  EXPECT_THROW(Decomposition(Image::zeros({1, 2, 2}), Image::zeros({1, 2, 2}), -0.1), ContractError);
  EXPECT_THROW(Decomposition(Image::zeros({1, 2, 2}), Image::zeros({1, 4, 1}), 0.2), ContractError);
}

TEST(LatentCode, DimensionsMustAgree) {
  EXPECT_NO_THROW(LatentCode({1, 2, 3}, {1, 2}, {3, 4, 5}));
  EXPECT_THROW(LatentCode({1, 2, 3}, {1, 2}, {3, 4}), ContractError);
  EXPECT_THROW(LatentCode({1, NAN, 3}, {1, 2}, {3, 4, 5}), ContractError);
}

TEST(Manifest, RoundTripPreservesImagesAndMetadata) {
  const fs::path dir = fs::temp_directory_path() / "plseada_manifest_roundtrip";
  fs::remove_all(dir);
  auto ds = toy_dataset(2, 2);
  auto written = write_dataset(ds, dir);
  auto loaded = load_manifest(dir);
  ASSERT_EQ(loaded.records().size(), ds.records().size());
  EXPECT_EQ(loaded.num_domains(), 2);
  EXPECT_EQ(loaded.image_shape(), ds.image_shape());
  EXPECT_EQ(loaded.content_hash(), written.content_hash());
  for (std::size_t i = 0; i < ds.records().size(); ++i) {
    const auto& a = ds.records()[i];
    const auto& b = loaded.records()[i];
    EXPECT_EQ(a.subject_id, b.subject_id);
    EXPECT_EQ(a.diagnosis, b.diagnosis);
    EXPECT_EQ(a.split, b.split);
    auto ia = ds.load_image(a), ib = loaded.load_image(b);
    EXPECT_TRUE(std::equal(ia.values().begin(), ia.values().end(), ib.values().begin()));
  }
  fs::remove_all(dir);
}

TEST(Manifest, MissingDirectoryIsMissingArtifact) {
  EXPECT_THROW(load_manifest("/nonexistent/plseada/dataset"), MissingArtifact);
}
