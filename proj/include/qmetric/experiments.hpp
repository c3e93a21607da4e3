#pragma once

// Scripted experiment runners behind the qmetric CLI. Each runner takes a JSON
// config and returns a deterministic tabular report with its assertion results.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qmetric {

inline constexpr const char* kToolVersion = "1.0.0";

enum class ExitCode : int { ok = 0, assertion_failed = 1, config_error = 2, resource_cap = 3 };

struct Report {
  std::string experiment;
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
  std::vector<std::string> failures;
  /// two-column plot data, one curve per name
  std::map<std::string, std::vector<std::pair<double, double>>> curves;

  bool passed() const noexcept { return failures.empty(); }
  std::string to_csv() const;
  std::string to_json() const;
};

/// 64-bit FNV-1a over the canonical JSON dump of the config.
std::string config_hash(const nlohmann::json& config);

/// `base_dir` resolves relative file references inside the config.
Report run_ball(const nlohmann::json& config, const std::string& base_dir = ".");
Report run_growth(const nlohmann::json& config, const std::string& base_dir = ".");
Report run_summable(const nlohmann::json& config, const std::string& base_dir = ".");
Report run_dist(const nlohmann::json& config, const std::string& base_dir = ".");
Report run_sandwich(const nlohmann::json& config, const std::string& base_dir = ".");
Report run_converge(const nlohmann::json& config, const std::string& base_dir = ".");
Report run_kappa(const nlohmann::json& config, const std::string& base_dir = ".");

/// Dispatches on the experiment name; ConfigError for unknown names.
Report run_experiment(const std::string& name, const nlohmann::json& config, const std::string& base_dir = ".");

const std::vector<std::string>& experiment_names();

}  // namespace qmetric
