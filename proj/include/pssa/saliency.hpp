#pragma once

// Per-position influence scores used to pick the word to extract.
//
// AttentionWeight: the model's attention distribution as is.
// PartialGradient: |(d log p(y_hat)/d h_i) . h_i| normalized over eligible
// positions, averaged over n noisy copies of the context word vectors.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pssa/model.hpp"

namespace pssa {

enum class SaliencyMode { AttentionWeight, PartialGradient };

std::string_view to_string(SaliencyMode mode);
SaliencyMode parse_saliency_mode(std::string_view text);  // "aw" | "pg"

struct SaliencyVector {
  std::vector<double> scores;
  SaliencyMode mode = SaliencyMode::AttentionWeight;
  /// Set when at least one sample had all-zero attribution and fell back to
  /// the uniform distribution.
  bool fallback = false;
};

struct NoiseOptions {
  int samples = 8;
  double sigma = 0.01;
};

SaliencyVector saliency_aw(const ForwardTrace& trace);

/// `rng` supplies one sub-stream seed per sample; everything else is pure.
/// The target class is the clean (noise-free) prediction.
SaliencyVector saliency_pg(const ModelParams& params, const Instance& instance,
                           std::span<const std::size_t> masked, const NoiseOptions& noise,
                           Rng& rng);

/// |raw_i| / sum_j |raw_j| over eligible positions, 0 elsewhere. Returns
/// nullopt when the eligible mass is zero.
std::optional<std::vector<double>> normalize_abs(std::span<const double> raw,
                                                 std::span<const char> eligible);

/// Index of the largest score; ties go to the lowest index.
std::size_t argmax(std::span<const double> scores);

}  // namespace pssa
