#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pssa/numerics.hpp"
#include "pssa/saliency.hpp"

namespace pssa {

/// Bad flag, bad key or bad value. Maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class RunMode { Baseline, AwAs, PgAs, RandomMask, ActiveOnly, MisleadingOnly };
std::string_view to_string(RunMode mode);
RunMode parse_run_mode(std::string_view text);

struct RunConfig {
  std::string dataset;                 // prepared corpus directory, or "synthetic"
  std::string embeddings;              // empty: random initialization
  RunMode mode = RunMode::PgAs;
  int k = 5;
  std::optional<double> epsilon;       // default 3.0
  std::optional<double> gamma;         // default from the dataset name
  int noise_n = 8;
  double noise_sigma = 0.01;
  double lr = 0.001;
  double dropout = 0.3;
  int epochs = 30;
  std::size_t batch = 32;
  std::uint64_t seed = 1;
  std::string out;                     // empty: derived under the output root
  std::size_t dim = 300;
  int patience = 5;
  int mine_epochs = 1;
  /// Saliency for the modes that do not imply one (random-mask, as_a-only,
  /// as_m-only).
  SaliencyMode saliency = SaliencyMode::PartialGradient;
  bool warm_start = false;
  bool train_embeddings = true;
  bool regularize_with_dropout = true;
  int bootstrap_n = 1000;
  double val_fraction = 0.2;           // synthetic datasets only
  std::uint64_t synthetic_seed = 1;
  std::size_t synthetic_train = 800;
  std::size_t synthetic_test = 400;

  double effective_epsilon() const { return epsilon.value_or(3.0); }
  double effective_gamma() const;
  SaliencyMode effective_saliency() const;
};

/// Every accepted key, in snapshot order.
const std::vector<std::string>& config_keys();

/// Sets one key from its text value. Throws ConfigError on unknown keys or
/// unparsable values.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

/// Flat "key = value" text; '#' starts a comment.
void apply_config_text(RunConfig& config, std::string_view text, std::string_view origin);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Checks ranges and required keys.
void validate(const RunConfig& config);

/// Snapshot with every default resolved; feeding it back reproduces the run.
std::string config_snapshot(const RunConfig& config);

/// --out if given, else <root>/<dataset stem>-<mode>-s<seed> where root is
/// $PSSA_OUT_ROOT or "runs".
std::filesystem::path output_directory(const RunConfig& config);

}  // namespace pssa
