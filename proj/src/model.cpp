#include "pssa/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace pssa {

std::array<Tensor*, 6> ModelParams::tensors() {
  return {&aspect_embedding, &memory_embedding, &context_embedding,
          &attention,        &output_weight,    &output_bias};
}

std::array<const Tensor*, 6> ModelParams::tensors() const {
  return {&aspect_embedding, &memory_embedding, &context_embedding,
          &attention,        &output_weight,    &output_bias};
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  auto dst = z.tensors();
  auto src = tensors();
  for (std::size_t i = 0; i < dst.size(); ++i) *dst[i] = Tensor::zeros_like(*src[i]);
  return z;
}

bool ModelParams::all_finite() const {
  for (const auto* t : tensors()) {
    if (!t->all_finite()) return false;
  }
  return true;
}

namespace {

void init_dense_layers(ModelParams& p, std::size_t dim, Rng& rng) {
  p.attention = uniform_tensor({dim, dim}, -0.01, 0.01, rng);
  p.output_weight = uniform_tensor({kNumClasses, dim}, -0.01, 0.01, rng);
  p.output_bias = uniform_tensor({kNumClasses}, -0.01, 0.01, rng);
}

}  // namespace

ModelParams init_params(std::size_t vocab_size, std::size_t dim, Rng& rng) {
  ModelParams p;
  p.aspect_embedding = uniform_tensor({vocab_size, dim}, -0.25, 0.25, rng);
  p.memory_embedding = uniform_tensor({vocab_size, dim}, -0.25, 0.25, rng);
  p.context_embedding = uniform_tensor({vocab_size, dim}, -0.25, 0.25, rng);
  init_dense_layers(p, dim, rng);
  return p;
}

ModelParams init_params(const Tensor& embeddings, Rng& rng) {
  if (embeddings.shape().size() != 2) throw Error("init_params: embeddings must be a matrix");
  ModelParams p;
  p.aspect_embedding = embeddings;
  p.memory_embedding = embeddings;
  p.context_embedding = embeddings;
  init_dense_layers(p, embeddings.cols(), rng);
  return p;
}

std::size_t ForwardTrace::eligible_count() const {
  return static_cast<std::size_t>(std::count(eligible.begin(), eligible.end(), char{1}));
}

std::vector<char> eligible_positions(const Instance& instance, std::span<const std::size_t> masked) {
  std::vector<char> eligible(instance.tokens.size(), 1);
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    if (instance.tokens[i] == Vocabulary::kMaskId) eligible[i] = 0;
  }
  for (auto a : instance.aspect) {
    if (a < eligible.size()) eligible[a] = 0;
  }
  for (auto m : masked) {
    if (m >= eligible.size()) {
      throw Error(fmt::format("instance {}: masked position {} out of range", instance.id, m));
    }
    eligible[m] = 0;
  }
  return eligible;
}

std::vector<double> aspect_repr(const ModelParams& params, const Instance& instance) {
  const std::size_t d = params.dim();
  std::vector<double> v(d, 0.0);
  for (auto a : instance.aspect) {
    const auto row = params.aspect_embedding.row(static_cast<std::size_t>(instance.tokens[a]));
    for (std::size_t k = 0; k < d; ++k) v[k] += row[k];
  }
  const double inv = 1.0 / static_cast<double>(instance.aspect.size());
  for (auto& x : v) x *= inv;
  return v;
}

ForwardTrace forward(const ModelParams& params, const Instance& instance,
                     std::span<const std::size_t> masked, const ForwardOptions& options) {
  const std::size_t n = instance.tokens.size();
  const std::size_t d = params.dim();
  if (instance.aspect.empty()) throw Error(fmt::format("instance {}: no aspect", instance.id));
  for (auto t : instance.tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= params.vocab_size()) {
      throw Error(fmt::format("instance {}: token id {} outside vocabulary", instance.id, t));
    }
  }
  const bool dropout = options.dropout > 0.0;
  if (dropout && options.rng == nullptr) throw std::invalid_argument("forward: dropout needs an rng");
  const double keep_scale = dropout ? 1.0 / (1.0 - options.dropout) : 1.0;

  ForwardTrace tr;
  tr.eligible = eligible_positions(instance, masked);
  if (tr.eligible_count() == 0) throw Error("fully masked");

  tr.aspect = aspect_repr(params, instance);
  tr.query.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const auto mrow = params.attention.row(j);
    for (std::size_t k = 0; k < d; ++k) tr.query[k] += tr.aspect[j] * mrow[k];
  }

  tr.memory = Tensor({n, d});
  tr.context = Tensor({n, d});
  if (dropout) {
    tr.memory_keep = Tensor({n, d});
    tr.context_keep = Tensor({n, d});
  }
  tr.scores.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!tr.eligible[i]) continue;
    const auto tok = static_cast<std::size_t>(instance.tokens[i]);
    auto m = tr.memory.row(i);
    auto h = tr.context.row(i);
    const auto m_src = params.memory_embedding.row(tok);
    const auto h_src = params.context_embedding.row(tok);
    for (std::size_t k = 0; k < d; ++k) {
      m[k] = m_src[k] + (options.memory_noise ? options.memory_noise->at(i, k) : 0.0);
      h[k] = h_src[k] + (options.context_noise ? options.context_noise->at(i, k) : 0.0);
    }
    if (dropout) {
      auto mk = tr.memory_keep.row(i);
      auto hk = tr.context_keep.row(i);
      for (std::size_t k = 0; k < d; ++k) {
        mk[k] = options.rng->uniform() < options.dropout ? 0.0 : keep_scale;
        m[k] *= mk[k];
      }
      for (std::size_t k = 0; k < d; ++k) {
        hk[k] = options.rng->uniform() < options.dropout ? 0.0 : keep_scale;
        h[k] *= hk[k];
      }
    }
    tr.scores[i] = dot(tr.query, m);
  }
  tr.alpha = masked_softmax(tr.scores, tr.eligible);

  tr.sentence.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!tr.eligible[i]) continue;
    const auto h = tr.context.row(i);
    for (std::size_t k = 0; k < d; ++k) tr.sentence[k] += tr.alpha[i] * h[k];
  }

  tr.features.resize(d);
  if (dropout) tr.combined_keep.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    tr.features[k] = tr.sentence[k] + tr.aspect[k];
    if (dropout) {
      tr.combined_keep[k] = options.rng->uniform() < options.dropout ? 0.0 : keep_scale;
      tr.features[k] *= tr.combined_keep[k];
    }
  }

  for (std::size_t c = 0; c < kNumClasses; ++c) {
    tr.logits[c] = params.output_bias[c] + dot(params.output_weight.row(c), tr.features);
  }
  const auto probs = softmax(tr.logits);
  std::copy(probs.begin(), probs.end(), tr.probs.begin());
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    if (tr.probs[c] > tr.probs[best]) best = c;
  }
  tr.predicted = static_cast<Sentiment>(best);
  return tr;
}

namespace {

double log_prob(const ForwardTrace& tr, Sentiment y) {
  const double top = *std::max_element(tr.logits.begin(), tr.logits.end());
  double s = 0.0;
  for (double l : tr.logits) s += std::exp(l - top);
  return tr.logits[static_cast<std::size_t>(y)] - top - std::log(s);
}

double total_loss(const ForwardTrace& tr, const Instance& instance, const Supervision& sup) {
  double value = sup.cross_entropy ? -log_prob(tr, instance.label) : 0.0;
  if (sup.expected != nullptr && sup.gamma != 0.0) {
    value += sup.gamma * regularizer(tr.alpha, *sup.expected);
  }
  if (!std::isfinite(value)) {
    throw NumericalError(fmt::format("numerical failure on instance {}", instance.id));
  }
  return value;
}

// d/d(features) -> d/d(o + v), undoing the dropout on the combined vector.
std::vector<double> combined_grad(const ModelParams& params, const ForwardTrace& tr,
                                  const std::array<double, kNumClasses>& dlogits) {
  const std::size_t d = params.dim();
  std::vector<double> dz(d, 0.0);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto w = params.output_weight.row(c);
    for (std::size_t k = 0; k < d; ++k) dz[k] += w[k] * dlogits[c];
  }
  if (!tr.combined_keep.empty()) {
    for (std::size_t k = 0; k < d; ++k) dz[k] *= tr.combined_keep[k];
  }
  return dz;
}

}  // namespace

double loss(const ModelParams& params, const Instance& instance,
            std::span<const std::size_t> masked, const Supervision& supervision,
            const ForwardOptions& options) {
  const auto tr = forward(params, instance, masked, options);
  return total_loss(tr, instance, supervision);
}

double loss_and_grads(const ModelParams& params, const Instance& instance,
                      std::span<const std::size_t> masked, const Supervision& supervision,
                      const ForwardOptions& options, ModelParams& grads, double scale) {
  const auto tr = forward(params, instance, masked, options);
  const double value = total_loss(tr, instance, supervision);

  const std::size_t n = instance.tokens.size();
  const std::size_t d = params.dim();
  const auto y = static_cast<std::size_t>(instance.label);

  std::array<double, kNumClasses> dlogits{};
  if (supervision.cross_entropy) {
    for (std::size_t c = 0; c < kNumClasses; ++c) dlogits[c] = tr.probs[c] - (c == y ? 1.0 : 0.0);
  }

  for (std::size_t c = 0; c < kNumClasses; ++c) {
    grads.output_bias[c] += scale * dlogits[c];
    auto gw = grads.output_weight.row(c);
    for (std::size_t k = 0; k < d; ++k) gw[k] += scale * dlogits[c] * tr.features[k];
  }

  const auto dsentence = combined_grad(params, tr, dlogits);
  std::vector<double> daspect = dsentence;

  std::vector<double> dalpha(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (tr.eligible[i]) dalpha[i] = dot(dsentence, tr.context.row(i));
  }
  if (supervision.expected != nullptr && supervision.gamma != 0.0) {
    accumulate_regularizer_grad(tr.alpha, *supervision.expected, supervision.gamma, dalpha);
  }
  double mean_dalpha = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (tr.eligible[i]) mean_dalpha += tr.alpha[i] * dalpha[i];
  }

  std::vector<double> dquery(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!tr.eligible[i]) continue;
    const auto tok = static_cast<std::size_t>(instance.tokens[i]);
    const double dscore = tr.alpha[i] * (dalpha[i] - mean_dalpha);
    const auto m = tr.memory.row(i);
    auto gm = grads.memory_embedding.row(tok);
    auto gh = grads.context_embedding.row(tok);
    const bool dropped = !tr.memory_keep.values().empty();
    for (std::size_t k = 0; k < d; ++k) {
      dquery[k] += dscore * m[k];
      const double mk = dropped ? tr.memory_keep.at(i, k) : 1.0;
      const double hk = dropped ? tr.context_keep.at(i, k) : 1.0;
      gm[k] += scale * dscore * tr.query[k] * mk;
      gh[k] += scale * tr.alpha[i] * dsentence[k] * hk;
    }
  }

  for (std::size_t j = 0; j < d; ++j) {
    auto gmat = grads.attention.row(j);
    const auto mrow = params.attention.row(j);
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      gmat[k] += scale * tr.aspect[j] * dquery[k];
      acc += mrow[k] * dquery[k];
    }
    daspect[j] += acc;
  }

  const double share = scale / static_cast<double>(instance.aspect.size());
  for (auto a : instance.aspect) {
    auto ga = grads.aspect_embedding.row(static_cast<std::size_t>(instance.tokens[a]));
    for (std::size_t k = 0; k < d; ++k) ga[k] += share * daspect[k];
  }
  return value;
}

Tensor context_log_prob_gradient(const ModelParams& params, const ForwardTrace& trace,
                                 Sentiment target) {
  const std::size_t n = trace.alpha.size();
  const std::size_t d = params.dim();
  const auto t = static_cast<std::size_t>(target);
  std::array<double, kNumClasses> dlogits{};
  for (std::size_t c = 0; c < kNumClasses; ++c) dlogits[c] = (c == t ? 1.0 : 0.0) - trace.probs[c];
  const auto dsentence = combined_grad(params, trace, dlogits);
  Tensor out({n, d});
  for (std::size_t i = 0; i < n; ++i) {
    if (!trace.eligible[i]) continue;
    auto row = out.row(i);
    for (std::size_t k = 0; k < d; ++k) row[k] = trace.alpha[i] * dsentence[k];
  }
  return out;
}

Sentiment predict(const ModelParams& params, const Instance& instance) {
  return forward(params, instance, {}).predicted;
}

}  // namespace pssa
