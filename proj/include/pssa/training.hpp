#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "pssa/eval.hpp"
#include "pssa/model.hpp"
#include "pssa/objective.hpp"

namespace pssa {

struct TrainConfig {
  double learning_rate = 0.001;
  int epochs = 30;
  std::size_t batch_size = 32;
  double dropout = 0.3;
  double gamma = 0.1;
  std::uint64_t seed = 1;
  /// Stop after this many epochs without a validation Macro-F1 gain; 0 disables.
  int patience = 5;
  /// Read the regularized attention from the dropout-on training pass.
  bool regularize_with_dropout = true;
  bool train_embeddings = true;
};

/// Default gamma for the named benchmark (laptop 0.1, rest 0.5, twitter 0.1).
double default_gamma(std::string_view dataset_name);

/// One training item: an (optionally masked) instance plus attention targets.
struct TrainExample {
  Instance instance;
  std::vector<std::size_t> masked;
  ExpectedDistribution expected;
};

/// An original instance joined with its mined supervision.
struct MinedInstance {
  Instance instance;
  SupervisionSets sets;
  ExpectedDistribution expected;
};

/// Checks the MinedInstance invariants (disjoint valid sets, targets equal
/// 1/|s_a| and 0).
void validate(const MinedInstance& mined);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean per-instance loss
  std::optional<double> validation_accuracy;
  std::optional<double> validation_macro_f1;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // 0 when no validation set was given
};

/// Mini-batch Adam on mean per-instance loss. With a validation set, keeps the
/// epoch with the highest Macro-F1 (earliest on ties) and stops early after
/// `patience` epochs without improvement.
TrainResult train_examples(ModelParams params, std::span<const TrainExample> corpus,
                           const TrainConfig& config, std::span<const Instance> validation = {});

/// Plain negative log-likelihood training.
TrainResult train(ModelParams params, std::span<const Instance> corpus, const TrainConfig& config,
                  std::span<const Instance> validation = {});

/// Cross-entropy plus gamma * attention regularizer on the unmasked sentences.
TrainResult train_supervised(ModelParams params, std::span<const MinedInstance> corpus,
                             const TrainConfig& config, std::span<const Instance> validation = {});

PredictionSet predict_all(const ModelParams& params, std::span<const Instance> instances);

/// Tab-separated: epoch, train_loss, validation_accuracy, validation_macro_f1.
void write_history(const std::filesystem::path& path, std::span<const EpochRecord> history);

}  // namespace pssa
