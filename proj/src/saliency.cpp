#include "pssa/saliency.hpp"

#include <cmath>

#include <fmt/format.h>

namespace pssa {

std::string_view to_string(SaliencyMode mode) {
  return mode == SaliencyMode::AttentionWeight ? "aw" : "pg";
}

SaliencyMode parse_saliency_mode(std::string_view text) {
  if (text == "aw") return SaliencyMode::AttentionWeight;
  if (text == "pg") return SaliencyMode::PartialGradient;
  throw Error(fmt::format("unknown saliency mode '{}' (expected aw or pg)", text));
}

SaliencyVector saliency_aw(const ForwardTrace& trace) {
  return {trace.alpha, SaliencyMode::AttentionWeight, false};
}

std::optional<std::vector<double>> normalize_abs(std::span<const double> raw,
                                                 std::span<const char> eligible) {
  double total = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!eligible[i]) continue;
    any = true;
    total += std::abs(raw[i]);
  }
  if (!any) throw Error("normalize_abs: no eligible position");
  if (!(total > 0.0)) return std::nullopt;
  std::vector<double> out(raw.size(), 0.0);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (eligible[i]) out[i] = std::abs(raw[i]) / total;
  }
  return out;
}

std::size_t argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

SaliencyVector saliency_pg(const ModelParams& params, const Instance& instance,
                           std::span<const std::size_t> masked, const NoiseOptions& noise,
                           Rng& rng) {
  if (noise.samples < 1) throw std::invalid_argument("saliency_pg: need at least one sample");
  if (noise.sigma < 0.0) throw std::invalid_argument("saliency_pg: sigma must be non-negative");

  const auto clean = forward(params, instance, masked);
  const Sentiment target = clean.predicted;
  const std::size_t n = instance.tokens.size();
  const std::size_t d = params.dim();

  SaliencyVector out;
  out.mode = SaliencyMode::PartialGradient;
  out.scores.assign(n, 0.0);
  double uniform_share = 1.0 / static_cast<double>(clean.eligible_count());

  for (int s = 0; s < noise.samples; ++s) {
    Rng sample_rng(rng.next_u64());
    ForwardTrace trace;
    if (noise.sigma > 0.0) {
      const Tensor memory_noise = gaussian_noise({n, d}, noise.sigma, sample_rng);
      const Tensor context_noise = gaussian_noise({n, d}, noise.sigma, sample_rng);
      ForwardOptions opts;
      opts.memory_noise = &memory_noise;
      opts.context_noise = &context_noise;
      trace = forward(params, instance, masked, opts);
    } else {
      trace = clean;
    }
    const Tensor grad = context_log_prob_gradient(params, trace, target);
    std::vector<double> raw(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (trace.eligible[i]) raw[i] = dot(grad.row(i), trace.context.row(i));
    }
    const auto normalized = normalize_abs(raw, trace.eligible);
    for (std::size_t i = 0; i < n; ++i) {
      if (!trace.eligible[i]) continue;
      if (normalized) {
        out.scores[i] += (*normalized)[i];
      } else {
        out.scores[i] += uniform_share;
      }
    }
    if (!normalized) out.fallback = true;
  }

  double total = 0.0;
  for (double x : out.scores) total += x;
  for (auto& x : out.scores) x /= total;
  return out;
}

}  // namespace pssa
