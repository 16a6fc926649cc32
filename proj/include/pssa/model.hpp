#pragma once

// Single-hop memory network for aspect-level sentiment:
//
//   v      = mean of aspect embeddings of the aspect tokens
//   s_i    = v^T M m_i                      (eligible positions only)
//   alpha  = softmax(s)
//   o      = sum_i alpha_i h_i
//   logits = W (o + v) + b
//
// m_i and h_i come from separate memory/context embedding tables. Aspect
// positions, masked positions and <mask> tokens are not eligible and get
// attention exactly 0.

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "pssa/dataset.hpp"
#include "pssa/numerics.hpp"
#include "pssa/objective.hpp"

namespace pssa {

struct ModelParams {
  Tensor aspect_embedding;   // |V| x d
  Tensor memory_embedding;   // |V| x d
  Tensor context_embedding;  // |V| x d
  Tensor attention;          // d x d
  Tensor output_weight;      // 3 x d
  Tensor output_bias;        // 3

  static constexpr std::array<const char*, 6> kNames = {
      "aspect_embedding", "memory_embedding", "context_embedding",
      "attention",        "output_weight",    "output_bias"};

  std::size_t dim() const { return attention.rows(); }
  std::size_t vocab_size() const { return aspect_embedding.rows(); }

  std::array<Tensor*, 6> tensors();
  std::array<const Tensor*, 6> tensors() const;
  ModelParams zeros_like() const;
  bool all_finite() const;
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// All three embedding tables ~ U[-0.25, 0.25]; attention and output layer
/// ~ U[-0.01, 0.01].
ModelParams init_params(std::size_t vocab_size, std::size_t dim, Rng& rng);
/// Embedding tables start as copies of `embeddings`; the rest as above.
ModelParams init_params(const Tensor& embeddings, Rng& rng);

/// Optional perturbations of one forward pass.
struct ForwardOptions {
  double dropout = 0.0;  // inverted dropout rate; 0 disables
  Rng* rng = nullptr;    // required when dropout > 0
  /// Additive noise on the memory / context vectors (N x d each), applied
  /// before dropout. Used by gradient saliency.
  const Tensor* memory_noise = nullptr;
  const Tensor* context_noise = nullptr;
};

struct ForwardTrace {
  std::vector<char> eligible;      // N
  std::vector<double> scores;      // N (0 where ineligible)
  std::vector<double> alpha;       // N
  std::vector<double> aspect;      // v, d
  std::vector<double> query;       // M^T v, d
  Tensor memory;                   // effective m_i, N x d
  Tensor context;                  // effective h_i, N x d
  Tensor memory_keep;              // dropout scale per cell (empty without dropout)
  Tensor context_keep;
  std::vector<double> sentence;    // o, d
  std::vector<double> combined_keep;  // dropout scale on o + v (empty without dropout)
  std::vector<double> features;    // dropout(o + v), d
  std::array<double, kNumClasses> logits{};
  std::array<double, kNumClasses> probs{};
  Sentiment predicted = Sentiment::Neutral;

  std::size_t eligible_count() const;
};

/// Positions that may receive attention given the extra masked positions.
std::vector<char> eligible_positions(const Instance& instance,
                                     std::span<const std::size_t> masked);

std::vector<double> aspect_repr(const ModelParams& params, const Instance& instance);

/// Throws Error("fully masked") when no position is eligible.
ForwardTrace forward(const ModelParams& params, const Instance& instance,
                     std::span<const std::size_t> masked, const ForwardOptions& options = {});

struct Supervision {
  const ExpectedDistribution* expected = nullptr;
  double gamma = 0.0;
  /// When false only the regularizer term is evaluated.
  bool cross_entropy = true;
};

/// -log p(y) + gamma * regularizer(alpha, expected). Gradients are scaled by
/// `scale` and added into `grads` (same layout as params). The regularizer
/// reads alpha from the same forward pass as the cross-entropy.
double loss_and_grads(const ModelParams& params, const Instance& instance,
                      std::span<const std::size_t> masked, const Supervision& supervision,
                      const ForwardOptions& options, ModelParams& grads, double scale = 1.0);

/// Loss only (no gradient work beyond the forward pass).
double loss(const ModelParams& params, const Instance& instance,
            std::span<const std::size_t> masked, const Supervision& supervision,
            const ForwardOptions& options = {});

/// d log p(target) / d h_i for every position (N x d; zero rows where
/// ineligible), evaluated at the trace's effective context vectors.
Tensor context_log_prob_gradient(const ModelParams& params, const ForwardTrace& trace,
                                 Sentiment target);

Sentiment predict(const ModelParams& params, const Instance& instance);

// Checkpoint: "PSSACKPT", u32 version, u32 dim, u32 |V|, u64 vocabulary hash,
// then the six tensors in declaration order as little-endian float32.
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const Vocabulary& vocab);
/// Throws Error on a vocabulary-hash mismatch or malformed file.
ModelParams load_checkpoint(const std::filesystem::path& path, const Vocabulary& vocab);

}  // namespace pssa
