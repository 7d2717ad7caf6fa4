#include "plseada/core/manifest.hpp"

#include <bit>
#include <fstream>

#include <nlohmann/json.hpp>

#include "plseada/core/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "raw image files are little-endian; big-endian hosts need byte swapping");

namespace plseada {

namespace fs = std::filesystem;
using nlohmann::json;

Image read_raw_image(const fs::path& path, const Shape& shape) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw MissingArtifact("cannot open image file " + path.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  const auto count = element_count(shape);
  if (bytes != count * sizeof(float)) {
    throw ContractError("image file " + path.string() + " has " + std::to_string(bytes) +
                        " bytes; shape " + to_string(shape) + " needs " +
                        std::to_string(count * sizeof(float)));
  }
  in.seekg(0);
  std::vector<float> values(count);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
  return Image(shape, std::move(values));
}

void write_raw_image(const fs::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MissingArtifact("cannot write image file " + path.string());
  auto values = image.values();
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
}

Dataset load_manifest(const fs::path& dir) {
  const auto path = dir / kManifestFileName;
  std::ifstream in(path);
  if (!in) throw MissingArtifact("dataset manifest not found: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed manifest " + path.string() + ": " + e.what());
  }
  if (doc.contains("schema_version") && doc["schema_version"].get<int>() != kManifestSchemaVersion) {
    throw ConfigError("unsupported manifest schema_version " + doc["schema_version"].dump());
  }
  try {
    std::vector<SubjectRecord> records;
    for (const auto& r : doc.at("records")) {
      SubjectRecord rec;
      rec.subject_id = r.at("subject_id").get<std::string>();
      rec.domain = r.at("domain").get<int>();
      rec.diagnosis = parse_diagnosis(r.at("diagnosis").get<std::string>());
      rec.split = parse_split(r.at("split").get<std::string>());
      rec.image = fs::absolute(dir / r.at("image_file").get<std::string>());
      records.push_back(std::move(rec));
    }
    auto provenance = doc.contains("provenance")
                          ? parse_provenance(doc["provenance"].get<std::string>())
                          : Provenance::External;
    return Dataset(std::move(records), doc.at("num_domains").get<int>(),
                   doc.at("image_shape").get<Shape>(),
                   doc.value("domain_names", std::vector<std::string>{}),
                   doc.value("generator_seed", std::uint64_t{0}), provenance);
  } catch (const json::exception& e) {
    throw ConfigError("manifest " + path.string() + " is missing a field: " + e.what());
  }
}

Dataset write_dataset(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir / "images");
  json records = json::array();
  std::vector<SubjectRecord> rewritten;
  rewritten.reserve(dataset.records().size());
  std::size_t index = 0;
  for (const auto& r : dataset.records()) {
    char name[32];
    std::snprintf(name, sizeof(name), "images/%06zu.f32", index++);
    write_raw_image(dir / name, dataset.load_image(r));
    records.push_back({{"subject_id", r.subject_id},
                       {"domain", r.domain},
                       {"diagnosis", std::string(to_string(r.diagnosis))},
                       {"split", std::string(to_string(r.split))},
                       {"image_file", name}});
    SubjectRecord copy = r;
    copy.image = fs::absolute(dir / name);
    rewritten.push_back(std::move(copy));
  }
  json doc = {{"schema_version", kManifestSchemaVersion},
              {"num_domains", dataset.num_domains()},
              {"image_shape", dataset.image_shape()},
              {"domain_names", dataset.domain_names()},
              {"generator_seed", dataset.generator_seed()},
              {"provenance", std::string(to_string(dataset.provenance()))},
              {"records", std::move(records)}};
  std::ofstream out(dir / kManifestFileName, std::ios::trunc);
  if (!out) throw MissingArtifact("cannot write manifest in " + dir.string());
  out << doc.dump(1) << '\n';
  return Dataset(std::move(rewritten), dataset.num_domains(), dataset.image_shape(),
                 dataset.domain_names(), dataset.generator_seed(), dataset.provenance());
}

}  // namespace plseada
