#pragma once

#include "heatdens/density_engine.hpp"
#include "heatdens/errors.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace heatdens::cli {

// Aggregated configuration failure. what() joins every violation.
class ConfigError : public DomainError {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct Study {
  engine::Method method;
  std::vector<std::size_t> orders;
};

struct ValidateConfig {
  std::size_t samples = 1000000;
  double ks_tol = 0.005;
  double variance_rel_tol = 0.01;
  // Below this sample variance the law is treated as a point mass and only
  // the variances are compared.
  double degenerate_variance = 1e-6;
};

struct OutputConfig {
  std::string directory = "out";
  bool samples_csv = false;
};

struct RunConfig {
  std::string description;
  engine::ModelBundle model;
  nlohmann::ordered_json model_json;
  std::vector<series::EvalPoint> points;
  std::vector<Study> studies;
  engine::QuadConfig quad;
  engine::GridSpec grid;
  ValidateConfig validate;
  OutputConfig output;
};

// Validates the whole document before building anything; all violations
// are reported together in one DomainError. Unknown keys are violations.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

}  // namespace heatdens::cli
