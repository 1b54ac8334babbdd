#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "dualmpc/simulation.hpp"

namespace dualmpc::cli {

/// Invalid or unreadable run configuration; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  SimConfig sim;
  std::string out_dir = "out";
};

/// Every field is optional; missing fields take the default experiment values
/// (landmark (5, 8), delta 0.1, L = 10, nu = 0.03, delta' = 1, mu = 0.5, c = 0,
/// p_hat_init (3, 10), x0 (5, 10)). Unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// Sets the value at a dotted path ("estimator.damping"). The value text is
/// parsed as JSON when possible, otherwise stored as a string.
void apply_override(nlohmann::json& doc, const std::string& dotted_path, const std::string& value);

/// Stable hash of the configuration with the seed and output directory removed.
std::string config_hash(const RunConfig& cfg);

}  // namespace dualmpc::cli
