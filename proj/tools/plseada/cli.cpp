#include "plseada/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "plseada/commands.hpp"
#include "plseada/core/error.hpp"

namespace plseada::cli {

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

RunConfig effective_config(const Globals& g) {
  RunConfig config = g.config.empty() ? run_config_from_json(nlohmann::json::object()) : load_run_config(g.config);
  if (g.seed) {
    config.seed = *g.seed;
    config.train.seed = *g.seed;
  }
  return config;
}

int dispatch(CLI::App& app, const Globals& g, const std::vector<CLI::App*>& cmds,
             const std::function<int(const std::string&, const RunConfig&)>& body) {
  for (auto* cmd : cmds) {
    if (cmd->parsed()) return body(cmd->get_name(), effective_config(g));
  }
  std::cerr << app.help();
  return kExitConfig;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"plseada: pseudo-linear style-encoder adversarial domain adaptation toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON config file (comments allowed)");
  app.add_option("--seed", g.seed, "Seed override (training and data generation)");
  app.add_option("--out", g.out, "Output root (default $PLSEADA_OUT, then config output_dir, then ./runs)");

  auto* gen = app.add_subcommand("generate-data", "Write a synthetic phantom dataset");
  std::string data_out;
  gen->add_option("--dir", data_out, "Dataset directory (default <out>/data)");

  auto* train = app.add_subcommand("train", "Train one model");
  std::string model_name, data_dir;
  std::optional<double> alpha;
  bool train_fast = false;
  train->add_option("--model", model_name, "cae | ada | se-ada | pl-se-ada")->required();
  train->add_option("--data", data_dir, "Dataset directory")->required();
  train->add_option("--alpha", alpha, "Domain ratio for pl-se-ada");
  train->add_flag("--fast", train_fast, "Reduced-round schedule");

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate trained runs");
  std::vector<std::string> runs;
  evaluate->add_option("--run", runs, "Run directory (repeatable)")->required();
  evaluate->add_option("--data", data_dir, "Dataset directory")->required();

  auto* sweep = app.add_subcommand("sweep-alpha", "Train and evaluate pl-se-ada per alpha");
  std::vector<double> alphas;
  bool sweep_fast = false;
  sweep->add_option("--alphas", alphas, "Alphas (default 0.05 0.1 0.2 0.5 1.0 1.5)");
  sweep->add_option("--data", data_dir, "Dataset directory")->required();
  sweep->add_flag("--fast", sweep_fast, "Reduced-round schedule");

  auto* report = app.add_subcommand("report", "Print result tables");
  std::string eval_dir, sweep_dir, report_file;
  report->add_option("--eval", eval_dir, "Evaluation directory");
  report->add_option("--sweep", sweep_dir, "Sweep directory");
  report->add_option("--file", report_file, "Also write the report to this file");

  auto* visualize = app.add_subcommand("visualize", "Figures for one run");
  std::string run_dir;
  visualize->add_option("--run", run_dir, "Run directory")->required();
  visualize->add_option("--data", data_dir, "Dataset directory")->required();
  std::string backend;
  visualize->add_option("--backend", backend, "neighbor-embedding | principal-components");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    return dispatch(app, g, {gen, train, evaluate, sweep, report, visualize},
                    [&](const std::string& name, const RunConfig& config) -> int {
      const auto root = resolve_output_root(g.out, config);
      if (name == "generate-data") {
        RunConfig c = config;
        if (g.seed) c.data.seed = *g.seed;
        const fs::path dir = data_out.empty() ? root / "data" : fs::path(data_out);
        std::cout << cmd_generate_data(c, dir).string() << '\n';
      } else if (name == "train") {
        RunConfig c = config;
        if (alpha) c.train.alpha = *alpha;
        if (train_fast) c.train = harmonizers::fast_profile(c.train);
        c.train.validate();
        std::cout << cmd_train(c, nets::parse_model_kind(model_name), data_dir, root).string() << '\n';
      } else if (name == "evaluate") {
        std::vector<fs::path> dirs(runs.begin(), runs.end());
        std::cout << cmd_evaluate(config, dirs, data_dir, root).string() << '\n';
      } else if (name == "sweep-alpha") {
        const auto outcome = cmd_sweep_alpha(config, alphas, sweep_fast, data_dir, root);
        std::cout << outcome.dir.string() << '\n';
        if (outcome.failures > 0) return kExitRuntime;
      } else if (name == "report") {
        const auto text = cmd_report(eval_dir.empty() ? std::nullopt : std::optional<fs::path>(eval_dir),
                                     sweep_dir.empty() ? std::nullopt : std::optional<fs::path>(sweep_dir));
        std::cout << text;
        if (!report_file.empty()) {
          std::ofstream out(report_file, std::ios::trunc);
          if (!out) throw MissingArtifact("cannot write " + report_file);
          out << text;
        }
      } else if (name == "visualize") {
        RunConfig c = config;
        if (!backend.empty()) c.viz.backend = backend;
        std::cout << cmd_visualize(c, run_dir, data_dir, root).string() << '\n';
      }
      return kExitOk;
    });
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ContractError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const TrainingAbort& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const MissingArtifact& e) {
    std::cerr << "missing artifact: " << e.what() << '\n';
    return kExitMissing;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace plseada::cli
