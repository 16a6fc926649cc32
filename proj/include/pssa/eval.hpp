#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "pssa/dataset.hpp"

namespace pssa {

/// Parallel id / gold / predicted sequences for one system.
struct PredictionSet {
  std::vector<std::string> ids;
  std::vector<Sentiment> gold;
  std::vector<Sentiment> predicted;

  std::size_t size() const { return ids.size(); }
  void push_back(std::string id, Sentiment g, Sentiment p);
};

/// Throws Error when lengths differ, ids repeat, or the set is empty.
void validate(const PredictionSet& preds);

double accuracy(const PredictionSet& preds);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

/// Per-class precision/recall/F1, indexed by Sentiment code. A class with no
/// predictions or no gold instances counts 0 for the undefined ratio, and F1
/// is 0 whenever P + R = 0.
std::array<ClassScores, kNumClasses> per_class_scores(const PredictionSet& preds);

/// Unweighted mean of the three per-class F1 scores.
double macro_f1(const PredictionSet& preds);

struct BootstrapResult {
  int resamples = 0;
  double p_accuracy = 1.0;
  double p_macro_f1 = 1.0;
};

/// Paired bootstrap: both systems are scored on the same resampled indices.
/// p = fraction of resamples in which system_a does not beat system_b.
BootstrapResult bootstrap_test(const PredictionSet& system_a, const PredictionSet& system_b,
                               int resamples, Rng& rng);

/// Structured text block: accuracy, macro_f1 and per-class P/R/F1.
std::string format_metrics(const std::string& section, const PredictionSet& preds);

}  // namespace pssa
