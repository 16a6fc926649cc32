#pragma once

// Progressive extraction of attention supervision.
//
// Each iteration masks every word extracted so far, re-predicts every
// training instance with the previous iteration's parameters, and, when the
// saliency distribution is peaked enough (entropy below the threshold),
// appends its most salient word to s_a (prediction correct) or s_m
// (prediction wrong). Training then continues on the masked corpus.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pssa/saliency.hpp"
#include "pssa/training.hpp"

namespace pssa {

struct MiningConfig {
  int iterations = 5;                  // K
  double entropy_threshold = 3.0;      // extraction happens when E < threshold
  SaliencyMode saliency = SaliencyMode::PartialGradient;
  NoiseOptions noise{};
  int epochs_per_iteration = 1;
  /// Ablation: extract a uniformly random eligible word instead of the argmax.
  bool random_mask = false;
  std::uint64_t seed = 1;
  bool keep_history = false;           // retain theta^(0..K)
  TrainConfig train{};                 // continuation training (gamma unused)
};

enum class Destination { None, Active, Misleading };
std::string_view to_string(Destination d);

enum class StepStatus { Extracted, Gated, Exhausted };
std::string_view to_string(StepStatus s);

struct StepDecision {
  StepStatus status = StepStatus::Gated;
  std::optional<std::size_t> position;
  Destination destination = Destination::None;
  double entropy = 0.0;
  Sentiment predicted = Sentiment::Neutral;
  SaliencyVector saliency;
  Instance masked;  // x' (masked with the sets as they were before this step)
  std::vector<std::size_t> masked_positions;
};

/// One mining step for one instance. Updates `sets` on extraction.
/// `rng` feeds PG noise and random-mask draws.
StepDecision mine_instance_step(const ModelParams& params, const Instance& instance,
                                SupervisionSets& sets, const MiningConfig& config, Rng& rng);

struct MiningLogEntry {
  int iteration = 0;
  std::string id;
  double entropy = 0.0;
  Sentiment gold = Sentiment::Neutral;
  Sentiment predicted = Sentiment::Neutral;
  StepStatus status = StepStatus::Gated;
  std::optional<std::size_t> position;
  Destination destination = Destination::None;
  std::vector<std::size_t> masked;  // positions masked when predicting
  std::vector<double> saliency;
};

struct MiningResult {
  std::vector<MinedInstance> corpus;  // D_s, in input order
  std::vector<MiningLogEntry> log;
  std::vector<ModelParams> history;   // theta^(0..K) when keep_history
  ModelParams final_params;           // theta^(K)
};

/// Runs K iterations starting from `initial` (already trained on `corpus`).
MiningResult run_mining(std::span<const Instance> corpus, ModelParams initial,
                        const MiningConfig& config);

/// Same loop with uniformly random extraction.
MiningResult mine_random_ablation(std::span<const Instance> corpus, ModelParams initial,
                                  MiningConfig config);

/// Restricts D_s to s_a only or s_m only (the ablation variants).
std::vector<MinedInstance> restrict_supervision(std::span<const MinedInstance> corpus,
                                                bool keep_active, bool keep_misleading);

SupervisionState to_supervision_state(std::span<const MinedInstance> corpus);

/// Mining log as JSON lines. The first line is a header object carrying the
/// corpus hash; every other line is one (iteration, instance) record.
void write_mining_log(const std::filesystem::path& path, std::span<const MiningLogEntry> log,
                      const std::string& corpus_hash, const Vocabulary& vocab,
                      std::span<const Instance> corpus);
struct MiningLog {
  std::string corpus_hash;
  std::vector<MiningLogEntry> entries;
};
MiningLog read_mining_log(const std::filesystem::path& path);

}  // namespace pssa
