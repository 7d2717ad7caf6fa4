#include "plseada/nets/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "plseada/core/error.hpp"

namespace plseada::nets {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic{'P', 'L', 'S', 'E', 'C', 'K', 'P', 'T'};

struct Archive {
  json header;
  std::vector<float> blob;
};

Archive read_archive(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("checkpoint not found: " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ConfigError(path.string() + " is not a checkpoint archive");
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw ConfigError("truncated checkpoint header in " + path.string());
  Archive a;
  a.header = json::parse(header);
  if (a.header.value("schema_version", -1) != kCheckpointSchemaVersion) {
    throw ConfigError("unsupported checkpoint schema_version in " + path.string());
  }
  const auto total = a.header.at("total_values").get<std::size_t>();
  a.blob.resize(total);
  in.read(reinterpret_cast<char*>(a.blob.data()), static_cast<std::streamsize>(total * sizeof(float)));
  if (!in) throw ConfigError("truncated checkpoint data in " + path.string());
  return a;
}

void assign(ModelBundle& bundle, const Archive& a, const fs::path& path) {
  auto params = bundle.named_parameters();
  const auto& table = a.header.at("tensors");
  if (table.size() != params.size()) {
    throw ConfigError("checkpoint " + path.string() + " holds " + std::to_string(table.size()) +
                      " tensors, model expects " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& entry = table[i];
    auto& p = *params[i].param;
    if (entry.at("name").get<std::string>() != params[i].path ||
        entry.at("shape").get<Shape>() != p.value.shape()) {
      throw ConfigError("checkpoint tensor " + entry.at("name").get<std::string>() +
                        " does not match model parameter " + params[i].path + " " +
                        to_string(p.value.shape()));
    }
    const auto offset = entry.at("offset").get<std::size_t>();
    std::memcpy(p.value.data(), a.blob.data() + offset, p.value.size() * sizeof(float));
  }
}

}  // namespace

void save_checkpoint(ModelBundle& bundle, const fs::path& path, const json& metadata) {
  json tensors = json::array();
  std::size_t offset = 0;
  auto params = bundle.named_parameters();
  for (const auto& np : params) {
    tensors.push_back({{"name", np.path}, {"shape", np.param->value.shape()}, {"offset", offset}});
    offset += np.param->value.size();
  }
  json header = {{"schema_version", kCheckpointSchemaVersion},
                 {"version", ModelBundle::kVersion},
                 {"model", std::string(to_string(bundle.kind()))},
                 {"config", to_json(bundle.config())},
                 {"metadata", metadata},
                 {"total_values", offset},
                 {"tensors", std::move(tensors)}};
  const auto text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MissingArtifact("cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& np : params) {
    out.write(reinterpret_cast<const char*>(np.param->value.data()),
              static_cast<std::streamsize>(np.param->value.size() * sizeof(float)));
  }
}

LoadedCheckpoint load_checkpoint(const fs::path& path) {
  auto archive = read_archive(path);
  auto config = network_config_from_json(archive.header.at("config"));
  ModelBundle bundle(config, parse_model_kind(archive.header.at("model").get<std::string>()));
  assign(bundle, archive, path);
  return {std::move(bundle), archive.header.value("metadata", json::object())};
}

json load_checkpoint_into(ModelBundle& bundle, const fs::path& path) {
  auto archive = read_archive(path);
  if (archive.header.at("config") != to_json(bundle.config())) {
    throw ConfigError("checkpoint " + path.string() + " was written with a different network config");
  }
  if (archive.header.at("model").get<std::string>() != to_string(bundle.kind())) {
    throw ConfigError("checkpoint " + path.string() + " holds a '" +
                      archive.header.at("model").get<std::string>() + "' model");
  }
  assign(bundle, archive, path);
  return archive.header.value("metadata", json::object());
}

}  // namespace plseada::nets
