#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace zsr {

/// Every hyperparameter, seed and path governing one pipeline run.
///
/// Defaults reproduce the published training recipe. Desk-scale runs override
/// `patch_size`, `restore_patch_size` and the iteration budgets.
struct RunConfig {
  // loss weights
  double lambda_adv = 1.0;
  double lambda_reg = 10.0;
  double lambda_dcy = 1.0;
  double lambda_rcy = 1.0;

  // distortion transfer: alpha in 1..n_alpha, latent weight alpha_scale * alpha
  int n_alpha = 100;
  double alpha_scale = 0.1;

  int ddn_iterations = 4000;
  int restore_epochs = 150;
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.99;
  int patch_size = 512;
  int restore_patch_size = 512;  ///< crop size for restoration training; full image when larger
  std::int64_t seed = 1;

  // network hyperparameters
  int base_width = 32;
  int depth = 3;

  int checkpoint_every = 500;

  // paths (relative paths resolve against the working directory)
  std::string reference;
  std::string distorted;
  std::string ground_truth;  ///< optional
  std::string output_dir;    ///< empty: $ZSR_OUTPUT_ROOT, else ./zsr_out

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(message), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Returns `cfg` unchanged when every field constraint holds; otherwise throws
/// ConfigError naming the first violated field.
RunConfig validate_config(const RunConfig& cfg);

/// Documented keys in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one key from its textual value. Throws ConfigError for unknown keys or bad values.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Parses UTF-8 `key = value` lines; '#' starts a comment. Unset keys keep their defaults.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical `key = value` serialization (every key, fixed order, shortest round-trip numbers).
std::string serialize_config(const RunConfig& cfg);
void save_config(const RunConfig& cfg, const std::filesystem::path& path);

/// SHA-256 of the canonical serialization.
std::string config_hash(const RunConfig& cfg);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace zsr
