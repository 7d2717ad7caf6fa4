#include "plseada/metrics/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "plseada/core/error.hpp"

namespace plseada::metrics {

using nlohmann::json;

void MetricsReport::validate() const {
  if (model_name.empty()) throw ContractError("metrics report needs a model name");
  if (rmse && !(*rmse >= 0.0)) throw ContractError("rmse must be >= 0");
  if (ssim && !(*ssim >= -1.0 && *ssim <= 1.0)) throw ContractError("ssim must lie in [-1, 1]");
  for (double f : {disease_f1, domain_f1}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ContractError("F1 scores must lie in [0, 1]");
  }
  if (rmse.has_value() != ssim.has_value()) {
    throw ContractError("rmse and ssim are either both present or both n/a");
  }
}

AvailabilityFlags flags_for(const std::string& name) {
  if (name == "cae" || name == "noise" || name == "ada") return {true, false, false};
  if (name == "combat") return {false, false, false};
  if (name == "se-ada") return {true, true, false};
  if (name == "pl-se-ada") return {true, true, true};
  throw ContractError("unknown model row '" + name + "'");
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json("n/a"); }

std::optional<double> read_optional(const json& doc, const char* key) {
  if (!doc.contains(key) || doc[key].is_null() || doc[key].is_string()) return std::nullopt;
  return doc[key].get<double>();
}

std::string format_number(const std::optional<double>& v, int digits) {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
  return buf;
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace

json to_json(const MetricsReport& r) {
  json doc = {{"model", r.model_name},
              {"rmse", optional_number(r.rmse)},
              {"ssim", optional_number(r.ssim)},
              {"disease_f1", r.disease_f1},
              {"domain_f1", r.domain_f1},
              {"alpha", r.alpha ? json(*r.alpha) : json(nullptr)},
              {"flags", {{"latent_available", r.flags.latent_available},
                         {"z_d_available", r.flags.z_d_available},
                         {"interpretable", r.flags.interpretable}}},
              {"seed", r.seed},
              {"dataset_hash", r.dataset_hash}};
  return doc;
}

MetricsReport metrics_report_from_json(const json& doc) {
  MetricsReport r;
  try {
    r.model_name = doc.at("model").get<std::string>();
    r.rmse = read_optional(doc, "rmse");
    r.ssim = read_optional(doc, "ssim");
    r.disease_f1 = doc.at("disease_f1").get<double>();
    r.domain_f1 = doc.at("domain_f1").get<double>();
    r.alpha = read_optional(doc, "alpha");
    const auto& f = doc.at("flags");
    r.flags = {f.at("latent_available").get<bool>(), f.at("z_d_available").get<bool>(),
               f.at("interpretable").get<bool>()};
    r.seed = doc.value("seed", std::uint64_t{0});
    r.dataset_hash = doc.value("dataset_hash", std::string{});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid metrics report: ") + e.what());
  }
  r.validate();
  return r;
}

std::string csv_header() {
  return "model,rmse,ssim,disease_f1,domain_f1,latent_available,z_d_available,interpretable";
}

std::string to_csv_row(const MetricsReport& r) {
  std::ostringstream out;
  out << r.model_name << ',' << format_number(r.rmse, 6) << ',' << format_number(r.ssim, 6) << ','
      << format_number(r.disease_f1, 6) << ',' << format_number(r.domain_f1, 6) << ','
      << yes_no(r.flags.latent_available) << ',' << yes_no(r.flags.z_d_available) << ','
      << yes_no(r.flags.interpretable);
  return out.str();
}

std::string to_csv(const std::vector<MetricsReport>& reports) {
  std::string out = csv_header() + "\n";
  for (const auto& r : reports) out += to_csv_row(r) + "\n";
  return out;
}

std::string to_text_table(const std::vector<MetricsReport>& reports) {
  const std::vector<std::string> head = {"Model", "RMSE", "SSIM", "Disease F1", "Domain F1",
                                         "Latent z", "z_d", "Interpretable"};
  std::vector<std::vector<std::string>> rows{head};
  for (const auto& r : reports) {
    rows.push_back({r.model_name, format_number(r.rmse, 4), format_number(r.ssim, 3),
                    format_number(r.disease_f1, 3), format_number(r.domain_f1, 3),
                    yes_no(r.flags.latent_available), yes_no(r.flags.z_d_available),
                    yes_no(r.flags.interpretable)});
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c] << std::string(width[c] - row[c].size() + (c + 1 < row.size() ? 2 : 0), ' ');
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace plseada::metrics
