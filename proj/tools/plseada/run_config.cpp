#include "plseada/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "plseada/core/error.hpp"

namespace plseada::cli {

using nlohmann::json;

json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

namespace {

VizConfig viz_from_json(const json& doc) {
  for (const auto& [key, _] : doc.items()) {
    if (!std::set<std::string>{"backend", "alphas", "grid_images"}.contains(key)) {
      throw ConfigError("unknown key in viz config: '" + key + "'");
    }
  }
  VizConfig v;
  try {
    v.backend = doc.value("backend", v.backend);
    v.alphas = doc.value("alphas", v.alphas);
    v.grid_images = doc.value("grid_images", v.grid_images);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid viz config: ") + e.what());
  }
  if (v.alphas.empty()) throw ConfigError("viz.alphas must not be empty");
  return v;
}

}  // namespace

RunConfig run_config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!std::set<std::string>{"schema_version", "seed", "output_dir", "data", "model", "train", "eval", "viz"}
             .contains(key)) {
      throw ConfigError("unknown key in config: '" + key + "'");
    }
  }
  if (doc.contains("schema_version") && doc["schema_version"] != kRunConfigSchemaVersion) {
    throw ConfigError("unsupported config schema_version " + doc["schema_version"].dump() + " (expected " +
                      std::to_string(kRunConfigSchemaVersion) + ")");
  }
  RunConfig c;
  try {
    c.seed = doc.value("seed", c.seed);
    c.output_dir = doc.value("output_dir", std::string{});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  if (doc.contains("data")) c.data = datagen::dataset_spec_from_json(doc["data"]);
  if (doc.contains("model")) c.model = nets::network_config_from_json(doc["model"]);
  if (doc.contains("train")) c.train = harmonizers::train_config_from_json(doc["train"]);
  if (doc.contains("eval")) c.eval = metrics::eval_config_from_json(doc["eval"]);
  if (doc.contains("viz")) c.viz = viz_from_json(doc["viz"]);
  if (!doc.contains("train") || !doc["train"].contains("seed")) c.train.seed = c.seed;
  if (!doc.contains("model") || !doc["model"].contains("num_domains")) c.model.num_domains = c.data.num_domains;
  if (!doc.contains("model") || !doc["model"].contains("d_s")) {
    c.model.d_s = static_cast<std::size_t>(c.model.num_domains);
  }
  if (!doc.contains("model") || !doc["model"].contains("image_shape")) c.model.image_shape = c.data.shape;
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return run_config_from_json(parse_config_text(buffer.str(), path.string()));
}

json to_json(const RunConfig& c) {
  return {{"schema_version", kRunConfigSchemaVersion},
          {"seed", c.seed},
          {"output_dir", c.output_dir.string()},
          {"data", datagen::to_json(c.data)},
          {"model", nets::to_json(c.model)},
          {"train", harmonizers::to_json(c.train)},
          {"eval", metrics::to_json(c.eval)},
          {"viz", {{"backend", c.viz.backend}, {"alphas", c.viz.alphas}, {"grid_images", c.viz.grid_images}}}};
}

std::filesystem::path resolve_output_root(const std::string& flag, const RunConfig& config) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PLSEADA_OUT"); env && *env) return env;
  if (!config.output_dir.empty()) return config.output_dir;
  return "runs";
}

}  // namespace plseada::cli
