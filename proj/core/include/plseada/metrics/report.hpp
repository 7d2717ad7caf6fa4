#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace plseada::metrics {

struct AvailabilityFlags {
  bool latent_available = false;
  bool z_d_available = false;
  bool interpretable = false;
};

/// One row of the model comparison table.
struct MetricsReport {
  std::string model_name;
  /// Empty for feature-space-only methods, rendered "n/a".
  std::optional<double> rmse;
  std::optional<double> ssim;
  double disease_f1 = 0.0;
  double domain_f1 = 0.0;
  std::optional<double> alpha;
  AvailabilityFlags flags;
  std::uint64_t seed = 0;
  std::string dataset_hash;

  /// Throws ContractError when a value is out of range.
  void validate() const;
};

/// Flags for a row name: "cae", "noise", "combat", "ada", "se-ada", "pl-se-ada".
AvailabilityFlags flags_for(const std::string& model_name);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const nlohmann::json& doc);

/// model,rmse,ssim,disease_f1,domain_f1,latent_available,z_d_available,interpretable
std::string csv_header();
std::string to_csv_row(const MetricsReport& report);
std::string to_csv(const std::vector<MetricsReport>& reports);

/// Plain-text aligned table, no emphasis markup.
std::string to_text_table(const std::vector<MetricsReport>& reports);

}  // namespace plseada::metrics
