#include "plseada/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "plseada/core/error.hpp"
#include "plseada/core/manifest.hpp"
#include "plseada/metrics/classification.hpp"
#include "plseada/nets/checkpoint.hpp"
#include "plseada/viz/figures.hpp"

namespace plseada::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCheckpointFile = "checkpoint.plseada";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw MissingArtifact("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("missing " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string());
}

void update_latest(const fs::path& root, const fs::path& dir) {
  write_text(root / "latest", dir.filename().string() + "\n");
}

Dataset open_dataset(const fs::path& data_dir) {
  if (!fs::exists(data_dir / "manifest.json")) throw MissingArtifact("no dataset manifest in " + data_dir.string());
  return load_manifest(data_dir);
}

struct LoadedRun {
  RunConfig config;
  nets::ModelBundle bundle;
};

LoadedRun load_run(const fs::path& run_dir) {
  if (!fs::exists(run_dir / kCheckpointFile)) throw MissingArtifact("no checkpoint in " + run_dir.string());
  auto config = run_config_from_json(read_json(run_dir / "config.json"));
  auto loaded = nets::load_checkpoint(run_dir / kCheckpointFile);
  return {std::move(config), std::move(loaded.bundle)};
}

std::string format_alpha(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", alpha);
  return buf;
}

int table_order(const std::string& name) {
  static const std::vector<std::string> order = {"cae", "noise", "combat", "ada", "se-ada", "pl-se-ada"};
  const auto it = std::find(order.begin(), order.end(), name);
  return static_cast<int>(it - order.begin());
}

harmonizers::TrainResult train_into(const RunConfig& config, nets::ModelKind kind, const Dataset& dataset,
                                    const fs::path& dir, const fs::path& data_dir) {
  write_json(dir / "config.json", to_json(config));
  auto result = harmonizers::train_model(kind, dataset, config.model, config.train);
  result.log.write_jsonl(dir / "train_log.jsonl");
  write_json(dir / "train_summary.json", result.log.summary());
  write_json(dir / "data.json", {{"path", fs::absolute(data_dir).string()},
                                 {"content_hash", std::to_string(dataset.content_hash())}});
  nets::save_checkpoint(result.bundle, dir / kCheckpointFile,
                        {{"seed", config.train.seed}, {"alpha", config.train.alpha}});
  return result;
}

}  // namespace

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%S", &tm);
  return buf;
}

fs::path make_unique_dir(const fs::path& root, const std::string& name) {
  fs::create_directories(root);
  for (int i = 1;; ++i) {
    const auto candidate = root / (i == 1 ? name : name + "-" + std::to_string(i));
    if (fs::create_directory(candidate)) return candidate;
  }
}

fs::path cmd_generate_data(const RunConfig& config, const fs::path& out_dir) {
  if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
    throw ConfigError("output directory " + out_dir.string() + " already exists and is not empty");
  }
  datagen::generate_dataset_to(config.data, out_dir);
  return out_dir;
}

fs::path cmd_train(const RunConfig& config, nets::ModelKind kind, const fs::path& data_dir, const fs::path& out_root) {
  const auto dataset = open_dataset(data_dir);
  const auto dir = make_unique_dir(
      out_root, std::string(nets::to_string(kind)) + "-" + std::to_string(config.train.seed) + "-" + timestamp());
  train_into(config, kind, dataset, dir, data_dir);
  update_latest(out_root, dir);
  return dir;
}

fs::path cmd_evaluate(const RunConfig& config, const std::vector<fs::path>& run_dirs, const fs::path& data_dir,
                      const fs::path& out_root) {
  if (run_dirs.empty()) throw ConfigError("evaluate needs at least one --run directory");
  const auto dataset = open_dataset(data_dir);
  std::vector<LoadedRun> runs;
  for (const auto& dir : run_dirs) runs.push_back(load_run(dir));

  std::vector<metrics::MetricsReport> rows;
  json extras = json::object();
  for (auto& run : runs) {
    const auto seed = run.config.train.seed;
    auto eval = metrics::evaluate_model(run.bundle, dataset, config.eval, run.config.train.alpha, seed);
    if (eval.z_d_prime_domain_f1) extras[eval.report.model_name] = {{"z_d_prime_domain_f1", *eval.z_d_prime_domain_f1}};
    rows.push_back(eval.report);
    if (run.bundle.kind() == nets::ModelKind::Cae) {
      rows.push_back(metrics::evaluate_feature_baseline(run.bundle, dataset, "noise", config.eval, seed));
      rows.push_back(metrics::evaluate_feature_baseline(run.bundle, dataset, "combat", config.eval, seed));
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return table_order(a.model_name) < table_order(b.model_name); });

  const auto dir = make_unique_dir(out_root, "eval-" + std::to_string(config.seed) + "-" + timestamp());
  json doc = {{"rows", json::array()}, {"extras", extras}, {"eval", metrics::to_json(config.eval)}};
  json sources = json::array();
  for (const auto& r : run_dirs) sources.push_back(fs::absolute(r).string());
  doc["runs"] = sources;
  for (const auto& r : rows) doc["rows"].push_back(metrics::to_json(r));
  write_json(dir / "metrics.json", doc);
  write_text(dir / "metrics.csv", metrics::to_csv(rows));
  write_text(dir / "table.txt", metrics::to_text_table(rows));
  update_latest(out_root, dir);
  return dir;
}

SweepOutcome cmd_sweep_alpha(const RunConfig& config, std::vector<double> alphas, bool fast, const fs::path& data_dir,
                             const fs::path& out_root) {
  if (alphas.empty()) alphas = viz::default_alphas();
  for (double a : alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("alphas must be finite and >= 0");
  }
  const auto dataset = open_dataset(data_dir);
  SweepOutcome outcome;
  outcome.dir = make_unique_dir(out_root, "sweep-" + std::to_string(config.train.seed) + "-" + timestamp());
  json summary = {{"fast", fast}, {"runs", json::array()}};
  std::string csv = "alpha,rmse,ssim,disease_f1,domain_f1\n";
  std::optional<nets::ModelBundle> strip_bundle;
  double strip_distance = 1e300;

  for (double alpha : alphas) {
    RunConfig run_config = config;
    run_config.train.alpha = alpha;
    if (fast) run_config.train = harmonizers::fast_profile(run_config.train);
    const auto run_dir = outcome.dir / ("alpha-" + format_alpha(alpha));
    json entry = {{"alpha", alpha}, {"dir", run_dir.filename().string()}};
    try {
      fs::create_directory(run_dir);
      auto result = train_into(run_config, nets::ModelKind::PlSeAda, dataset, run_dir, data_dir);
      const auto eval = metrics::evaluate_model(result.bundle, dataset, config.eval, alpha, run_config.train.seed);
      write_json(run_dir / "metrics.json", metrics::to_json(eval.report));
      char line[160];
      std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f,%.6f\n", format_alpha(alpha).c_str(), *eval.report.rmse,
                    *eval.report.ssim, eval.report.disease_f1, eval.report.domain_f1);
      csv += line;
      entry["status"] = "ok";
      if (std::abs(alpha - 0.2) < strip_distance) {
        strip_distance = std::abs(alpha - 0.2);
        strip_bundle = std::move(result.bundle);
      }
    } catch (const Error& e) {
      entry["status"] = "failed";
      entry["error"] = e.what();
      ++outcome.failures;
      std::cerr << "alpha " << alpha << " failed: " << e.what() << '\n';
    }
    summary["runs"].push_back(entry);
  }
  write_text(outcome.dir / "alpha_sweep.csv", csv);
  if (strip_bundle) {
    const auto test = dataset.split(Split::Test);
    const auto strip = viz::emit_alpha_strip(*strip_bundle, dataset.load_image(test.front()), alphas,
                                             outcome.dir / "alpha_strip.png");
    summary["alpha_strip"] = {{"mean_abs_alpha_x_d", strip.mean_abs_alpha_x_d}, {"mean_intensity", strip.mean_intensity}};
  }
  summary["failures"] = outcome.failures;
  write_json(outcome.dir / "summary.json", summary);
  update_latest(out_root, outcome.dir);
  return outcome;
}

std::string cmd_report(const std::optional<fs::path>& eval_dir, const std::optional<fs::path>& sweep_dir) {
  if (!eval_dir && !sweep_dir) throw ConfigError("report needs --eval and/or --sweep");
  std::ostringstream out;
  if (eval_dir) {
    const auto doc = read_json(*eval_dir / "metrics.json");
    std::vector<metrics::MetricsReport> rows;
    for (const auto& r : doc.at("rows")) rows.push_back(metrics::metrics_report_from_json(r));
    out << "Model comparison (" << eval_dir->filename().string() << ")\n" << metrics::to_text_table(rows);
  }
  if (sweep_dir) {
    const auto path = *sweep_dir / "alpha_sweep.csv";
    std::ifstream in(path);
    if (!in) throw MissingArtifact("missing " + path.string());
    if (eval_dir) out << '\n';
    out << "Alpha sweep (" << sweep_dir->filename().string() << ")\n";
    std::string line;
    std::getline(in, line);
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-8s  %-8s  %-6s  %-10s  %-9s\n", "alpha", "RMSE", "SSIM", "Disease F1",
                  "Domain F1");
    out << buf;
    while (std::getline(in, line)) {
      double a, r, s, d, m;
      if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &a, &r, &s, &d, &m) != 5) continue;
      std::snprintf(buf, sizeof buf, "%-8g  %-8.4f  %-6.3f  %-10.3f  %-9.3f\n", a, r, s, d, m);
      out << buf;
    }
    const auto& p = kPublishedAlphaRow;
    std::snprintf(buf, sizeof buf, "%-8g  %-8.4f  %-6.3f  %-10.3f  %-9.3f  (%s)\n", p.alpha, p.rmse, p.ssim,
                  p.disease_f1, p.domain_f1, kPublishedLabel);
    out << buf;
  }
  return out.str();
}

fs::path cmd_visualize(const RunConfig& config, const fs::path& run_dir, const fs::path& data_dir,
                       const fs::path& out_root) {
  const auto dataset = open_dataset(data_dir);
  auto run = load_run(run_dir);
  const auto dir = make_unique_dir(out_root, "viz-" + std::string(nets::to_string(run.bundle.kind())) + "-" +
                                                 std::to_string(run.config.train.seed) + "-" + timestamp());
  json summary = {{"run", fs::absolute(run_dir).string()}, {"backend", config.viz.backend}};
  const auto test = dataset.split(Split::Test);
  if (run.bundle.kind() == nets::ModelKind::PlSeAda) {
    std::vector<Image> images;
    const auto count = std::min(config.viz.grid_images, test.size());
    for (std::size_t i = 0; i < count; ++i) images.push_back(dataset.load_image(test[i * test.size() / count]));
    const auto grid =
        viz::emit_reconstruction_grid(run.bundle, images, run.config.train.alpha, dir / "reconstruction_grid.png");
    double eu = 0.0, ed = 0.0;
    for (const auto& row : grid.rows) {
      eu += row.x_u.edge_energy;
      ed += row.x_d.edge_energy;
    }
    summary["edge_energy_ratio_x_d_over_x_u"] = eu > 0.0 ? ed / eu : 0.0;
    const auto strip = viz::emit_alpha_strip(run.bundle, images.front(), config.viz.alphas, dir / "alpha_strip.png");
    summary["alpha_strip_mean_abs_alpha_x_d"] = strip.mean_abs_alpha_x_d;
  }
  const auto seed = run.config.train.seed;
  const auto zu = viz::project_latents(run.bundle, dataset, Split::Test, metrics::LatentKind::ZU, config.viz.backend, seed);
  viz::emit_scatter(zu, viz::ColorBy::Domain, dir / "z_u_by_domain.png");
  viz::emit_scatter(zu, viz::ColorBy::Diagnosis, dir / "z_u_by_diagnosis.png");
  summary["z_u_domain_silhouette"] = viz::domain_silhouette(zu);
  if (run.bundle.has_style()) {
    const auto zd =
        viz::project_latents(run.bundle, dataset, Split::Test, metrics::LatentKind::ZD, config.viz.backend, seed);
    viz::emit_scatter(zd, viz::ColorBy::Domain, dir / "z_d_by_domain.png");
    summary["z_d_domain_silhouette"] = viz::domain_silhouette(zd);
  }
  write_json(dir / "summary.json", summary);
  update_latest(out_root, dir);
  return dir;
}

}  // namespace plseada::cli
