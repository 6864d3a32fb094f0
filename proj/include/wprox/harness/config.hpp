#ifndef WPROX_HARNESS_CONFIG_HPP_
#define WPROX_HARNESS_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "wprox/gaussian_prox.hpp"
#include "wprox/prox_trainer.hpp"

namespace wprox::harness {

enum class ExperimentKind { kGaussian, kMfldProx, kMfldGd, kReference, kSweep, kCompare };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

/// Config failure; `field` names the offending key (empty for syntax errors).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& reason);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Noisy-GD run that produces the high-resolution reference cloud.
struct ReferenceConfig {
  double step_xi = 0.001;
  Eigen::Index particles = 1000;
  int max_steps = 50000;
  int window = 1000;
  double tol = 1e-6;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kGaussian;

  // Gaussian path.
  GaussianProxConfig<double> gaussian;
  Eigen::Index histogram_particles = 1000;
  std::uint64_t histogram_seed = 0;

  // Mean-field network path.
  MfldRunConfig mfld;
  ReferenceConfig reference;
  int repetitions = 5;
  bool use_reference = true;
  std::string cache_dir = "wprox_cache";
  std::vector<Eigen::Index> sweep_particles{50, 100, 200, 500};

  std::string output_dir = "out";
};

/// Defaults for `kind`, before any key is applied.
ExperimentConfig default_config(ExperimentKind kind);

/// Parses flat `key = value` lines ('#' starts a comment; strings may be
/// quoted; lists are comma separated, optionally in brackets). Unknown keys,
/// duplicate keys, malformed values and constraint violations throw ConfigError.
ExperimentConfig parse_config_text(ExperimentKind kind, const std::string& text);
ExperimentConfig parse_config(ExperimentKind kind, const std::filesystem::path& path);

/// Applies one `key=value` override with the same rules as the file parser.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Throws ConfigError naming the first violated constraint.
void validate(const ExperimentConfig& cfg);

/// Every key accepted for the config's kind, with its resolved value, in a
/// fixed order. Re-parsing the text reproduces the config.
std::string resolved_text(const ExperimentConfig& cfg);

/// Keys accepted for a kind.
std::vector<std::string> allowed_keys(ExperimentKind kind);

}  // namespace wprox::harness

#endif  // WPROX_HARNESS_CONFIG_HPP_
