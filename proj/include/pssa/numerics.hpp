#pragma once

// Dense tensors, softmax/entropy helpers, a portable seeded RNG and the Adam
// update. Everything here works in 64-bit reals.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pssa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a loss or gradient becomes non-finite.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Row-major dense tensor of doubles. Rank 1 and 2 are the only shapes the
/// model needs, but nothing here depends on rank.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_.front(); }
  std::size_t cols() const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  void fill(double value);
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

/// Seeded pseudo-random stream. The engine is mt19937_64 (fully specified by
/// the standard); all distributions are implemented here so that draws are
/// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return position_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);
  /// Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal();

  /// Independent stream derived from this stream's seed and a stream id.
  /// Does not advance this stream.
  Rng split(std::uint64_t stream_id) const;

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t position_ = 0;
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id);

/// Softmax over `scores` where positions with eligible[i] == 0 get exactly 0.
/// Throws Error("empty support") when nothing is eligible.
std::vector<double> masked_softmax(std::span<const double> scores,
                                   std::span<const char> eligible);

/// Softmax with an explicit set of excluded indices.
std::vector<double> softmax(std::span<const double> scores,
                            std::span<const std::size_t> excluded = {});

/// Shannon entropy in nats, with 0 log 0 = 0.
double entropy(std::span<const double> dist);

/// One parameter tensor paired with its analytic gradient.
struct GradientPair {
  Tensor* value;
  const Tensor* analytic;
};

/// Compares analytic gradients against central differences. `loss` is
/// re-evaluated with one coordinate perturbed at a time. At most
/// `per_tensor_cap` coordinates are sampled (uniformly, without replacement)
/// per tensor. Returns the max relative error
/// |a - n| / max(|a|, |n|, 1e-8).
double check_gradient(const std::function<double()>& loss,
                      std::span<const GradientPair> params, double h, Rng& rng,
                      std::size_t per_tensor_cap = 100);

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam. Moments are created on the first call.
void adam_step(std::span<Tensor* const> params,
               std::span<const Tensor* const> grads, AdamState& state,
               double learning_rate);

/// i.i.d. N(0, sigma^2). Always consumes one normal draw per element so the
/// stream position does not depend on sigma.
Tensor gaussian_noise(std::vector<std::size_t> shape, double sigma, Rng& rng);

Tensor uniform_tensor(std::vector<std::size_t> shape, double lo, double hi,
                      Rng& rng);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace pssa
