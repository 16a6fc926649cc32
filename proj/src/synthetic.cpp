#include "pssa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace pssa {
namespace {

std::vector<double> random_direction(std::size_t dim, double norm, Rng& rng) {
  std::vector<double> v(dim);
  double sq = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    sq += x * x;
  }
  const double k = norm / std::sqrt(sq);
  for (auto& x : v) x *= k;
  return v;
}

std::vector<double> around(const std::vector<double>& centre, double spread, Rng& rng) {
  std::vector<double> v(centre);
  for (auto& x : v) x += spread * rng.normal();
  return v;
}

struct Lexicon {
  std::vector<std::string> positive, negative, fillers, aspects;
};

Lexicon make_lexicon(const SyntheticConfig& c) {
  Lexicon lex;
  for (std::size_t i = 0; i < c.lexicon_size; ++i) {
    lex.positive.push_back(fmt::format("pos{:02}", i));
    lex.negative.push_back(fmt::format("neg{:02}", i));
  }
  for (std::size_t i = 0; i < c.filler_count; ++i) lex.fillers.push_back(fmt::format("w{:02}", i));
  for (std::size_t i = 0; i < c.aspect_count; ++i) lex.aspects.push_back(fmt::format("aspect{}", i));
  return lex;
}

void insert_random(std::vector<std::string>& tokens, std::string word, Rng& rng) {
  const auto at = rng.below(tokens.size() + 1);
  tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at), std::move(word));
}

TextInstance sentence(std::string id, Sentiment label, const std::string* sentiment_word,
                      bool with_frequent, const Lexicon& lex, const SyntheticConfig& c,
                      Rng& rng) {
  std::vector<std::string> tokens;
  const auto n = c.min_fillers + rng.below(c.max_fillers - c.min_fillers + 1);
  for (std::size_t i = 0; i < n; ++i) tokens.push_back(lex.fillers[rng.below(lex.fillers.size())]);
  if (sentiment_word) insert_random(tokens, *sentiment_word, rng);
  if (with_frequent) insert_random(tokens, c.frequent_word, rng);

  const auto& aspect = lex.aspects[rng.below(lex.aspects.size())];
  const auto at = rng.below(tokens.size() + 1);
  tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at), aspect);
  return TextInstance{std::move(id), std::move(tokens), {at}, label};
}

}  // namespace

SyntheticCorpus make_synthetic(const SyntheticConfig& c) {
  if (c.lexicon_size == 0 || c.filler_count == 0 || c.aspect_count == 0 || c.dim == 0) {
    throw std::invalid_argument("synthetic: empty lexicon");
  }
  if (c.max_fillers < c.min_fillers) throw std::invalid_argument("synthetic: filler range");
  if (!(c.frequent_precision > 0.0 && c.frequent_precision <= 1.0)) {
    throw std::invalid_argument("synthetic: frequent_precision must be in (0, 1]");
  }
  const Lexicon lex = make_lexicon(c);
  Rng root(c.seed);
  Rng vec_rng = root.split(1);
  Rng train_rng = root.split(2);
  Rng test_rng = root.split(3);

  SyntheticCorpus out;
  const double spread = c.word_noise / std::sqrt(static_cast<double>(c.dim));
  const auto pos_centre = random_direction(c.dim, c.cluster_separation, vec_rng);
  const auto neg_centre = random_direction(c.dim, c.cluster_separation, vec_rng);
  const std::vector<double> origin(c.dim, 0.0);
  for (const auto& w : lex.positive) out.vectors[w] = around(pos_centre, spread, vec_rng);
  for (const auto& w : lex.negative) out.vectors[w] = around(neg_centre, spread, vec_rng);
  for (const auto& w : lex.fillers) out.vectors[w] = around(origin, spread, vec_rng);
  for (const auto& w : lex.aspects) out.vectors[w] = around(origin, spread, vec_rng);
  out.vectors[c.frequent_word] = around(origin, spread, vec_rng);

  // P(F | negative) chosen so that P(positive | F) hits the target, given
  // equal positive and negative shares.
  const double f_pos = c.frequent_in_positive;
  const double f_neg = std::min(1.0, f_pos * (1.0 - c.frequent_precision) / c.frequent_precision);

  auto regular = [&](std::string id, Rng& rng) {
    const double u = rng.uniform();
    if (u < c.neutral_fraction) {
      return sentence(std::move(id), Sentiment::Neutral, nullptr, false, lex, c, rng);
    }
    const bool positive = rng.uniform() < 0.5;
    const auto& pool = positive ? lex.positive : lex.negative;
    const auto& word = pool[rng.below(pool.size())];
    const bool with_f = rng.uniform() < (positive ? f_pos : f_neg);
    return sentence(std::move(id), positive ? Sentiment::Positive : Sentiment::Negative, &word,
                    with_f, lex, c, rng);
  };

  for (std::size_t i = 0; i < c.train_size; ++i) {
    out.train.push_back(regular(fmt::format("syn-train-{:04}", i), train_rng));
  }
  for (std::size_t i = 0; i < c.test_size; ++i) {
    auto id = fmt::format("syn-test-{:04}", i);
    if (test_rng.uniform() < c.trap_fraction) {
      const bool negative_trap = test_rng.uniform() < 0.5;
      const auto& pool = negative_trap ? lex.negative : lex.positive;
      const auto& word = pool[test_rng.below(pool.size())];
      out.test.push_back(sentence(std::move(id),
                                  negative_trap ? Sentiment::Negative : Sentiment::Positive,
                                  &word, negative_trap, lex, c, test_rng));
    } else {
      out.test.push_back(regular(std::move(id), test_rng));
    }
  }
  return out;
}

bool is_trap(const TextInstance& instance, const SyntheticConfig& config) {
  const bool has_f = std::find(instance.tokens.begin(), instance.tokens.end(),
                               config.frequent_word) != instance.tokens.end();
  return (has_f && instance.label == Sentiment::Negative) ||
         (!has_f && instance.label == Sentiment::Positive);
}

}  // namespace pssa
