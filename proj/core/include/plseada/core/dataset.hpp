#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "plseada/core/image.hpp"

namespace plseada {

enum class Diagnosis { CN, AD, MCI };
enum class Split { Train, Test };
enum class Provenance { Synthetic, External };

std::string_view to_string(Diagnosis d);
std::string_view to_string(Split s);
std::string_view to_string(Provenance p);
Diagnosis parse_diagnosis(std::string_view s);
Split parse_split(std::string_view s);
Provenance parse_provenance(std::string_view s);

std::set<Diagnosis> all_diagnoses();

using ImageRef = std::variant<std::filesystem::path, std::shared_ptr<const Image>>;

struct SubjectRecord {
  std::string subject_id;
  int domain = 0;
  Diagnosis diagnosis = Diagnosis::CN;
  Split split = Split::Train;
  ImageRef image;
};

/// Records plus the metadata needed to interpret them. Construction checks
/// the subject-disjoint split, label ranges and per-split domain coverage.
class Dataset {
 public:
  Dataset(std::vector<SubjectRecord> records, int num_domains, Shape image_shape,
          std::vector<std::string> domain_names, std::uint64_t generator_seed,
          Provenance provenance);

  const std::vector<SubjectRecord>& records() const noexcept { return records_; }
  int num_domains() const noexcept { return num_domains_; }
  const Shape& image_shape() const noexcept { return image_shape_; }
  const std::vector<std::string>& domain_names() const noexcept { return domain_names_; }
  std::uint64_t generator_seed() const noexcept { return generator_seed_; }
  Provenance provenance() const noexcept { return provenance_; }

  std::set<int> all_domains() const;
  std::vector<SubjectRecord> split(Split s) const;

  /// Loads (or returns) the record's image and checks it against image_shape().
  Image load_image(const SubjectRecord& record) const;

  /// Stable FNV hash over records and metadata; identifies the dataset in reports.
  std::uint64_t content_hash() const;

 private:
  std::vector<SubjectRecord> records_;
  int num_domains_;
  Shape image_shape_;
  std::vector<std::string> domain_names_;
  std::uint64_t generator_seed_;
  Provenance provenance_;
};

/// One record per distinct subject, chosen by a seeded hash of the subject
/// id. Output keeps the input order. Throws EmptyInputError on empty input.
std::vector<SubjectRecord> select_one_per_subject(std::span<const SubjectRecord> records,
                                                  std::uint64_t seed);
std::vector<SubjectRecord> select_one_per_subject(const Dataset& dataset, Split split,
                                                  std::uint64_t seed);

/// Records of `split` whose diagnosis and domain are both in the given sets.
std::vector<SubjectRecord> filter_records(const Dataset& dataset, Split split,
                                          const std::set<Diagnosis>& diagnoses,
                                          const std::set<int>& domains);
std::vector<SubjectRecord> filter_records(std::span<const SubjectRecord> records,
                                          const std::set<Diagnosis>& diagnoses,
                                          const std::set<int>& domains);

}  // namespace plseada
