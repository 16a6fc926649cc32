#pragma once

// Fixtures and independent reference computations shared by the tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "pssa/model.hpp"
#include "pssa/numerics.hpp"

namespace pssa::testing {

/// Params with every tensor ~ U[-scale, scale]; larger than the production
/// init so that gradients are far from zero.
inline ModelParams random_params(std::size_t vocab, std::size_t dim, Rng& rng,
                                 double scale = 0.5) {
  ModelParams p;
  p.aspect_embedding = uniform_tensor({vocab, dim}, -scale, scale, rng);
  p.memory_embedding = uniform_tensor({vocab, dim}, -scale, scale, rng);
  p.context_embedding = uniform_tensor({vocab, dim}, -scale, scale, rng);
  p.attention = uniform_tensor({dim, dim}, -scale, scale, rng);
  p.output_weight = uniform_tensor({3, dim}, -scale, scale, rng);
  p.output_bias = uniform_tensor({3}, -scale, scale, rng);
  return p;
}

/// Random sentence over ids [2, vocab) with one or two aspect positions.
inline Instance random_instance(std::size_t vocab, std::size_t length, Rng& rng,
                                std::string id = "r") {
  Instance inst;
  inst.id = std::move(id);
  for (std::size_t i = 0; i < length; ++i) {
    inst.tokens.push_back(static_cast<std::int32_t>(2 + rng.below(vocab - 2)));
  }
  inst.aspect.push_back(rng.below(length));
  if (length > 3 && rng.uniform() < 0.5) {
    const auto second = (inst.aspect[0] + 1) % length;
    inst.aspect.push_back(second);
    std::sort(inst.aspect.begin(), inst.aspect.end());
  }
  inst.label = sentiment_from_code(static_cast<int>(rng.below(3)));
  return inst;
}

/// Straight-line log-probabilities of the memory network, written without
/// any of the library's model code. `context` optionally replaces the
/// context vectors h_i (N x d).
inline std::array<double, 3> reference_log_probs(const ModelParams& p, const Instance& inst,
                                                 const std::vector<std::size_t>& masked,
                                                 const Tensor* context = nullptr) {
  const std::size_t d = p.dim();
  const std::size_t n = inst.tokens.size();
  std::vector<double> v(d, 0.0);
  for (auto a : inst.aspect) {
    for (std::size_t j = 0; j < d; ++j) {
      v[j] += p.aspect_embedding.at(static_cast<std::size_t>(inst.tokens[a]), j);
    }
  }
  for (auto& x : v) x /= static_cast<double>(inst.aspect.size());

  std::vector<bool> ok(n, true);
  for (auto a : inst.aspect) ok[a] = false;
  for (auto m : masked) ok[m] = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (inst.tokens[i] == Vocabulary::kMaskId) ok[i] = false;
  }

  std::vector<double> score(n, 0.0);
  double top = -1e300;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) continue;
    const auto t = static_cast<std::size_t>(inst.tokens[i]);
    double s = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        s += v[a] * p.attention.at(a, b) * p.memory_embedding.at(t, b);
      }
    }
    score[i] = s;
    top = std::max(top, s);
  }
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ok[i]) z += std::exp(score[i] - top);
  }
  std::vector<double> o(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) continue;
    const double alpha = std::exp(score[i] - top) / z;
    const auto t = static_cast<std::size_t>(inst.tokens[i]);
    for (std::size_t j = 0; j < d; ++j) {
      const double h = context ? context->at(i, j) : p.context_embedding.at(t, j);
      o[j] += alpha * h;
    }
  }
  std::array<double, 3> logits{};
  for (std::size_t c = 0; c < 3; ++c) {
    logits[c] = p.output_bias[c];
    for (std::size_t j = 0; j < d; ++j) logits[c] += p.output_weight.at(c, j) * (o[j] + v[j]);
  }
  const double m = std::max({logits[0], logits[1], logits[2]});
  const double lz = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m) +
                                 std::exp(logits[2] - m));
  return {logits[0] - lz, logits[1] - lz, logits[2] - lz};
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pssa_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace pssa::testing
