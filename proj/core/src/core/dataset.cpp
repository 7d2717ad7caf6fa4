#include "plseada/core/dataset.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "plseada/core/error.hpp"
#include "plseada/core/manifest.hpp"
#include "plseada/core/random.hpp"

namespace plseada {

std::string_view to_string(Diagnosis d) {
  switch (d) {
    case Diagnosis::CN: return "CN";
    case Diagnosis::AD: return "AD";
    case Diagnosis::MCI: return "MCI";
  }
  return "?";
}

std::string_view to_string(Split s) { return s == Split::Train ? "train" : "test"; }

std::string_view to_string(Provenance p) {
  return p == Provenance::Synthetic ? "synthetic" : "external";
}

Diagnosis parse_diagnosis(std::string_view s) {
  if (s == "CN") return Diagnosis::CN;
  if (s == "AD") return Diagnosis::AD;
  if (s == "MCI") return Diagnosis::MCI;
  throw ConfigError("unknown diagnosis '" + std::string(s) + "' (expected CN, AD or MCI)");
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw ConfigError("unknown split '" + std::string(s) + "' (expected train or test)");
}

Provenance parse_provenance(std::string_view s) {
  if (s == "synthetic") return Provenance::Synthetic;
  if (s == "external") return Provenance::External;
  throw ConfigError("unknown provenance '" + std::string(s) + "'");
}

std::set<Diagnosis> all_diagnoses() { return {Diagnosis::CN, Diagnosis::AD, Diagnosis::MCI}; }

Dataset::Dataset(std::vector<SubjectRecord> records, int num_domains, Shape image_shape,
                 std::vector<std::string> domain_names, std::uint64_t generator_seed,
                 Provenance provenance)
    : records_(std::move(records)),
      num_domains_(num_domains),
      image_shape_(std::move(image_shape)),
      domain_names_(std::move(domain_names)),
      generator_seed_(generator_seed),
      provenance_(provenance) {
  if (num_domains_ < 2) throw ConfigError("a dataset needs at least 2 domains (K >= 2)");
  validate_image_shape(image_shape_);
  if (domain_names_.empty()) {
    for (int k = 0; k < num_domains_; ++k) domain_names_.push_back("domain" + std::to_string(k));
  }
  if (static_cast<int>(domain_names_.size()) != num_domains_) {
    throw ConfigError("domain_names must have num_domains entries");
  }

  std::unordered_map<std::string, Split> subject_split;
  std::map<Split, std::set<int>> seen_domains;
  for (const auto& r : records_) {
    if (r.domain < 0 || r.domain >= num_domains_) {
      throw ContractError("record " + r.subject_id + " has domain " + std::to_string(r.domain) +
                          " outside [0, " + std::to_string(num_domains_) + ")");
    }
    auto [it, inserted] = subject_split.emplace(r.subject_id, r.split);
    if (!inserted && it->second != r.split) {
      throw ContractError("subject " + r.subject_id + " appears in both train and test splits");
    }
    if (auto* img = std::get_if<std::shared_ptr<const Image>>(&r.image)) {
      if (!*img || (*img)->shape() != image_shape_) {
        throw ContractError("record " + r.subject_id + " image does not match dataset shape " +
                            to_string(image_shape_));
      }
    }
    seen_domains[r.split].insert(r.domain);
  }
  for (Split s : {Split::Train, Split::Test}) {
    if (static_cast<int>(seen_domains[s].size()) != num_domains_) {
      throw ContractError("every domain must occur in the " + std::string(to_string(s)) +
                          " split");
    }
  }
}

std::set<int> Dataset::all_domains() const {
  std::set<int> out;
  for (int k = 0; k < num_domains_; ++k) out.insert(k);
  return out;
}

std::vector<SubjectRecord> Dataset::split(Split s) const {
  std::vector<SubjectRecord> out;
  for (const auto& r : records_) {
    if (r.split == s) out.push_back(r);
  }
  return out;
}

Image Dataset::load_image(const SubjectRecord& record) const {
  if (const auto* img = std::get_if<std::shared_ptr<const Image>>(&record.image)) {
    return **img;
  }
  return read_raw_image(std::get<std::filesystem::path>(record.image), image_shape_);
}

std::uint64_t Dataset::content_hash() const {
  std::uint64_t h = hash_string("plseada-dataset");
  auto mix = [&h](std::uint64_t v) { h = mix64(h ^ v); };
  mix(static_cast<std::uint64_t>(num_domains_));
  for (auto e : image_shape_) mix(e);
  mix(generator_seed_);
  for (const auto& r : records_) {
    mix(hash_string(r.subject_id));
    mix(static_cast<std::uint64_t>(r.domain));
    mix(static_cast<std::uint64_t>(r.diagnosis));
    mix(static_cast<std::uint64_t>(r.split));
  }
  return h;
}

std::vector<SubjectRecord> select_one_per_subject(std::span<const SubjectRecord> records,
                                                  std::uint64_t seed) {
  if (records.empty()) throw EmptyInputError("select_one_per_subject: no records in split");

  std::unordered_map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < records.size(); ++i) by_subject[records[i].subject_id].push_back(i);

  std::vector<bool> keep(records.size(), false);
  for (const auto& [id, indices] : by_subject) {
    auto pick = derive_seed(seed, hash_string(id)) % indices.size();
    keep[indices[pick]] = true;
  }
  std::vector<SubjectRecord> out;
  out.reserve(by_subject.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.push_back(records[i]);
  }
  return out;
}

std::vector<SubjectRecord> select_one_per_subject(const Dataset& dataset, Split split,
                                                  std::uint64_t seed) {
  auto records = dataset.split(split);
  return select_one_per_subject(records, seed);
}

std::vector<SubjectRecord> filter_records(std::span<const SubjectRecord> records,
                                          const std::set<Diagnosis>& diagnoses,
                                          const std::set<int>& domains) {
  std::vector<SubjectRecord> out;
  for (const auto& r : records) {
    if (diagnoses.contains(r.diagnosis) && domains.contains(r.domain)) out.push_back(r);
  }
  return out;
}

std::vector<SubjectRecord> filter_records(const Dataset& dataset, Split split,
                                          const std::set<Diagnosis>& diagnoses,
                                          const std::set<int>& domains) {
  auto records = dataset.split(split);
  return filter_records(records, diagnoses, domains);
}

}  // namespace plseada
