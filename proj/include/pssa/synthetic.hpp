#pragma once

// Generated corpus with a frequent shortcut word.
//
// Training sentences carry one sentiment word from a positive or negative
// lexicon. A frequent word (default "huge") appears mostly in positive
// sentences, so a model can reach high training accuracy by attending to it.
// The test slice mixes regular sentences with traps: the frequent word next
// to a negative word, and positive words without the frequent word.

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pssa/dataset.hpp"

namespace pssa {

struct SyntheticConfig {
  std::uint64_t seed = 1;
  std::size_t train_size = 800;
  std::size_t test_size = 400;
  double trap_fraction = 0.5;        // share of the test slice made of traps
  std::string frequent_word = "huge";
  double frequent_in_positive = 0.8; // P(F | positive) in regular sentences
  double frequent_precision = 0.9;   // P(positive | F) in training
  double neutral_fraction = 0.1;
  std::size_t lexicon_size = 150;    // per polarity
  std::size_t filler_count = 30;
  std::size_t aspect_count = 5;
  std::size_t min_fillers = 3;
  std::size_t max_fillers = 7;
  std::size_t dim = 25;
  double cluster_separation = 1.0;   // norm of each polarity centre
  double word_noise = 2.0;           // per-coordinate std of word vectors, times 1/sqrt(dim)
};

struct SyntheticCorpus {
  std::vector<TextInstance> train;
  std::vector<TextInstance> test;
  /// "Pre-trained" vectors for every generated word.
  std::unordered_map<std::string, std::vector<double>> vectors;
};

SyntheticCorpus make_synthetic(const SyntheticConfig& config);

/// True when a test instance is one of the trap patterns.
bool is_trap(const TextInstance& instance, const SyntheticConfig& config);

}  // namespace pssa
