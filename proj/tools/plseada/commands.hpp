#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "plseada/run_config.hpp"

namespace plseada::cli {

/// Creates `root/name`, or `root/name-2`, `root/name-3`, ... when taken.
std::filesystem::path make_unique_dir(const std::filesystem::path& root, const std::string& name);

/// UTC "YYYYmmddTHHMMSS".
std::string timestamp();

/// Writes the dataset described by config.data into `out_dir`, which must
/// not already hold files.
std::filesystem::path cmd_generate_data(const RunConfig& config, const std::filesystem::path& out_dir);

/// Trains one model into a fresh `{model}-{seed}-{timestamp}` directory
/// under `out_root` and updates `out_root/latest`.
std::filesystem::path cmd_train(const RunConfig& config, nets::ModelKind kind, const std::filesystem::path& data_dir,
                                const std::filesystem::path& out_root);

/// Evaluates trained runs; a CAE run also yields the noise and combat rows.
std::filesystem::path cmd_evaluate(const RunConfig& config, const std::vector<std::filesystem::path>& run_dirs,
                                   const std::filesystem::path& data_dir, const std::filesystem::path& out_root);

struct SweepOutcome {
  std::filesystem::path dir;
  std::size_t failures = 0;
};

/// One PL-SE-ADA training and evaluation per alpha.
SweepOutcome cmd_sweep_alpha(const RunConfig& config, std::vector<double> alphas, bool fast,
                             const std::filesystem::path& data_dir, const std::filesystem::path& out_root);

/// Plain-text tables assembled from an evaluation and/or sweep directory.
std::string cmd_report(const std::optional<std::filesystem::path>& eval_dir,
                       const std::optional<std::filesystem::path>& sweep_dir);

/// Figures and sidecars for one trained run.
std::filesystem::path cmd_visualize(const RunConfig& config, const std::filesystem::path& run_dir,
                                    const std::filesystem::path& data_dir, const std::filesystem::path& out_root);

/// Published alpha = 0.2 row, kept for side-by-side display only.
struct ReferenceRow {
  double alpha, rmse, ssim, disease_f1, domain_f1;
};
inline constexpr ReferenceRow kPublishedAlphaRow{0.2, 0.0991, 0.729, 0.875, 0.512};
inline constexpr const char* kPublishedLabel = "published reference, ADNI, not reproduced here";

}  // namespace plseada::cli
