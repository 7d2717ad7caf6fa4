#include "plseada/metrics/protocol.hpp"

#include <set>

#include "plseada/core/error.hpp"
#include "plseada/core/random.hpp"
#include "plseada/harmonizers/combat.hpp"
#include "plseada/metrics/classification.hpp"

namespace plseada::metrics {

using nets::Tensor;

namespace {

std::set<int> domains_of(std::span<const SubjectRecord> records) {
  std::set<int> out;
  for (const auto& r : records) out.insert(r.domain);
  return out;
}

std::set<Diagnosis> diagnoses_of(std::span<const SubjectRecord> records) {
  std::set<Diagnosis> out;
  for (const auto& r : records) out.insert(r.diagnosis);
  return out;
}

Tensor<float> fetch(const FeatureSource& source, const std::vector<SubjectRecord>& records,
                    Split role, const RecordAudit& audit) {
  if (audit) {
    for (const auto& r : records) audit(r, role);
  }
  auto features = source(records);
  if (features.rank() != 2 || features.dim(0) != records.size()) {
    throw ContractError("feature source returned " + to_string(features.shape()) + " for " +
                        std::to_string(records.size()) + " records");
  }
  return features;
}

ProbeOutcome run_probe(std::vector<SubjectRecord> train, std::vector<SubjectRecord> test,
                       const FeatureSource& source, const ProbeOptions& options, std::size_t hidden,
                       int num_classes, int (*label_of)(const SubjectRecord&), std::uint64_t stream) {
  ProbeData data;
  data.train_features = fetch(source, train, Split::Train, options.audit);
  data.test_features = fetch(source, test, Split::Test, options.audit);
  data.train_records = std::move(train);
  data.test_records = std::move(test);
  if (options.transform) options.transform(data);

  std::vector<int> train_labels, test_labels;
  for (const auto& r : data.train_records) train_labels.push_back(label_of(r));
  for (const auto& r : data.test_records) test_labels.push_back(label_of(r));

  ProbeConfig config = options.probe;
  config.hidden = hidden;
  config.seed = derive_seed(options.seed, stream);
  const auto probe = train_probe(data.train_features, train_labels, num_classes, config);
  const auto predicted = probe.predict(data.test_features);
  return {macro_f1(predicted, test_labels, num_classes), train_labels.size(), test_labels.size()};
}

int disease_label(const SubjectRecord& r) { return r.diagnosis == Diagnosis::AD ? 1 : 0; }
int domain_label(const SubjectRecord& r) { return r.domain; }

}  // namespace

ProbeOutcome evaluate_disease(const Dataset& dataset, const FeatureSource& features,
                              const ProbeOptions& options) {
  const std::set<Diagnosis> classes{Diagnosis::AD, Diagnosis::CN};
  const auto all = dataset.all_domains();
  auto train = filter_records(dataset, Split::Train, classes, all);
  auto test = filter_records(dataset, Split::Test, classes, all);
  if (diagnoses_of(train) != classes || diagnoses_of(test) != classes) {
    throw ContractError("disease probe needs both AD and CN records in the train and test splits");
  }
  return run_probe(select_one_per_subject(train, options.seed),
                   select_one_per_subject(test, derive_seed(options.seed, 1)), features, options,
                   kDiseaseProbeHidden, 2, disease_label, 0xD15EA5E);
}

ProbeOutcome evaluate_domain(const Dataset& dataset, const FeatureSource& features,
                             const ProbeOptions& options) {
  const auto all = dataset.all_domains();
  auto train = filter_records(dataset, Split::Train, {Diagnosis::CN}, all);
  auto test = filter_records(dataset, Split::Test, {Diagnosis::CN}, all);
  if (domains_of(train).size() < 2 || domains_of(test).size() < 2) {
    throw ContractError("domain probe needs CN records from at least 2 domains in the train and test splits");
  }
  return run_probe(select_one_per_subject(train, options.seed),
                   select_one_per_subject(test, derive_seed(options.seed, 1)), features, options,
                   kDomainProbeHidden, dataset.num_domains(), domain_label, 0xD0A1);
}

FeatureSource latent_features(const nets::ModelBundle& bundle, const Dataset& dataset, LatentKind kind) {
  if (kind != LatentKind::ZU && !bundle.has_style()) {
    throw ContractError("model '" + std::string(nets::to_string(bundle.kind())) + "' has no z_d");
  }
  return [&bundle, &dataset, kind](std::span<const SubjectRecord> records) {
    constexpr std::size_t kChunk = 64;
    std::vector<float> values;
    std::size_t width = 0;
    for (std::size_t b = 0; b < records.size(); b += kChunk) {
      std::vector<Image> images;
      for (std::size_t i = b; i < std::min(records.size(), b + kChunk); ++i) {
        images.push_back(dataset.load_image(records[i]));
      }
      const auto batch = nets::to_batch(images);
      Tensor<float> z;
      switch (kind) {
        case LatentKind::ZU: z = bundle.encode(batch); break;
        case LatentKind::ZDPrime: z = bundle.style_encode(batch); break;
        case LatentKind::ZD: z = bundle.expand(bundle.style_encode(batch)); break;
      }
      width = z.item_size();
      values.insert(values.end(), z.storage().begin(), z.storage().end());
    }
    return Tensor<float>({records.size(), width}, std::move(values));
  };
}

FeatureTransform noise_transform(double sigma, std::uint64_t seed) {
  return [sigma, seed](ProbeData& data) {
    data.train_features = harmonizers::noise_augment(data.train_features, sigma, derive_seed(seed, 1));
    data.test_features = harmonizers::noise_augment(data.test_features, sigma, derive_seed(seed, 2));
  };
}

FeatureTransform combat_transform() {
  return [](ProbeData& data) {
    auto to_double = [](const Tensor<float>& t) { return nets::tensor_cast<double>(t); };
    auto sites = [](const std::vector<SubjectRecord>& records) {
      std::vector<int> s;
      for (const auto& r : records) s.push_back(r.domain);
      return s;
    };
    const auto train_sites = sites(data.train_records);
    const auto model = harmonizers::combat_fit(to_double(data.train_features), train_sites);
    data.train_features =
        nets::tensor_cast<float>(harmonizers::combat_apply(model, to_double(data.train_features), train_sites));
    data.test_features = nets::tensor_cast<float>(
        harmonizers::combat_apply(model, to_double(data.test_features), sites(data.test_records)));
  };
}

}  // namespace plseada::metrics
