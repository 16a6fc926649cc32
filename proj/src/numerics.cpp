#include "pssa/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace pssa {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto s : shape) {
    if (s == 0) throw std::invalid_argument("tensor dimensions must be positive");
    n *= s;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), values_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != product(shape_)) {
    throw std::invalid_argument("tensor value count does not match shape");
  }
}

std::size_t Tensor::cols() const {
  if (shape_.size() < 2) return 1;
  return values_.size() / shape_.front();
}

std::span<double> Tensor::row(std::size_t r) {
  const auto c = cols();
  return std::span<double>(values_).subspan(r * c, c);
}

std::span<const double> Tensor::row(std::size_t r) const {
  const auto c = cols();
  return std::span<const double>(values_).subspan(r * c, c);
}

void Tensor::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

// SplitMix64 finalizer.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t Rng::next_u64() {
  ++position_;
  return engine_();
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below requires n > 0");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return static_cast<std::size_t>(x % bound);
}

double Rng::normal() {
  double u1 = uniform();
  const double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::split(std::uint64_t stream_id) const { return Rng(mix_seed(seed_, stream_id)); }

std::vector<double> masked_softmax(std::span<const double> scores,
                                   std::span<const char> eligible) {
  if (scores.size() != eligible.size()) {
    throw std::invalid_argument("softmax: mask length mismatch");
  }
  double best = -INFINITY;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (eligible[i]) best = std::max(best, scores[i]);
  }
  if (best == -INFINITY) throw Error("empty support");

  std::vector<double> out(scores.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!eligible[i]) continue;
    out[i] = std::exp(scores[i] - best);
    total += out[i];
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (eligible[i]) out[i] /= total;
  }
  return out;
}

std::vector<double> softmax(std::span<const double> scores,
                            std::span<const std::size_t> excluded) {
  std::vector<char> eligible(scores.size(), 1);
  for (auto i : excluded) {
    if (i >= scores.size()) throw std::out_of_range("softmax: excluded index out of range");
    eligible[i] = 0;
  }
  return masked_softmax(scores, eligible);
}

double entropy(std::span<const double> dist) {
  double total = 0.0;
  double h = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0) || p > 1.0 + 1e-12) throw Error("invalid distribution");
    total += p;
    if (p > 0.0) h -= p * std::log(p);
  }
  if (std::abs(total - 1.0) > 1e-6) throw Error("invalid distribution");
  return std::max(h, 0.0);
}

double check_gradient(const std::function<double()>& loss,
                      std::span<const GradientPair> params, double h, Rng& rng,
                      std::size_t per_tensor_cap) {
  if (!(h >= 1e-6 && h <= 1e-4)) {
    throw std::invalid_argument("check_gradient: h must lie in [1e-6, 1e-4]");
  }
  const double base = loss();
  if (!std::isfinite(base)) throw NumericalError("unstable point");

  double worst = 0.0;
  for (const auto& p : params) {
    if (!p.value->same_shape(*p.analytic)) {
      throw std::invalid_argument("check_gradient: gradient shape mismatch");
    }
    std::vector<std::size_t> coords(p.value->size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > per_tensor_cap) {
      // Partial Fisher-Yates: the first `cap` entries form a uniform sample.
      for (std::size_t i = 0; i < per_tensor_cap; ++i) {
        std::swap(coords[i], coords[i + rng.below(coords.size() - i)]);
      }
      coords.resize(per_tensor_cap);
    }
    for (auto c : coords) {
      double& x = (*p.value)[c];
      const double saved = x;
      x = saved + h;
      const double up = loss();
      x = saved - h;
      const double down = loss();
      x = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) throw NumericalError("unstable point");
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = (*p.analytic)[c];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  }
  return worst;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
               AdamState& state, double learning_rate) {
  if (params.size() != grads.size()) throw std::invalid_argument("adam_step: arity mismatch");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("adam_step: learning rate must be positive");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(*grads[i])) {
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    }
  }
  if (state.first_moment.empty()) {
    for (auto* p : params) {
      state.first_moment.push_back(Tensor::zeros_like(*p));
      state.second_moment.push_back(Tensor::zeros_like(*p));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw std::invalid_argument("adam_step: state arity mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!state.first_moment[i].same_shape(*params[i])) {
      throw std::invalid_argument("adam_step: moment shape mismatch");
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(state.beta1, t);
  const double correct2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto value = params[i]->values();
    auto g = grads[i]->values();
    auto m = state.first_moment[i].values();
    auto v = state.second_moment[i].values();
    for (std::size_t j = 0; j < value.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correct1;
      const double v_hat = v[j] / correct2;
      value[j] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

Tensor gaussian_noise(std::vector<std::size_t> shape, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("gaussian_noise: sigma must be non-negative");
  Tensor out(std::move(shape));
  for (auto& x : out.values()) {
    const double z = rng.normal();
    x = sigma == 0.0 ? 0.0 : sigma * z;
  }
  return out;
}

Tensor uniform_tensor(std::vector<std::size_t> shape, double lo, double hi, Rng& rng) {
  Tensor out(std::move(shape));
  for (auto& x : out.values()) x = rng.uniform(lo, hi);
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace pssa
