#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pssa/numerics.hpp"

namespace pssa {

enum class Sentiment : int { Positive = 0, Negative = 1, Neutral = 2 };

inline constexpr std::size_t kNumClasses = 3;

std::string_view to_string(Sentiment s);
/// Accepts "positive"/"negative"/"neutral" (any case) and "pos"/"neg"/"neu".
Sentiment parse_sentiment(std::string_view text);
inline int code(Sentiment s) { return static_cast<int>(s); }
Sentiment sentiment_from_code(int c);

/// A sentence/aspect/label triple before vocabulary lookup.
struct TextInstance {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::size_t> aspect;  // sorted token positions
  Sentiment label = Sentiment::Neutral;
};

/// The encoded form the model consumes.
struct Instance {
  std::string id;
  std::vector<std::int32_t> tokens;
  std::vector<std::size_t> aspect;  // sorted, non-empty, in bounds
  Sentiment label = Sentiment::Neutral;

  bool is_aspect(std::size_t pos) const;
};

/// Validates the Instance invariants; throws Error naming the id otherwise.
void validate(const Instance& instance);

struct Token {
  std::string text;   // lowercased UTF-8
  std::size_t begin;  // code-point offsets into the source text
  std::size_t end;
};

/// Lowercases and splits on whitespace; every punctuation character becomes
/// its own token. `boundaries` are extra code-point offsets at which a token
/// is always cut (used to honour aspect spans that end mid-word).
std::vector<Token> tokenize(std::string_view utf8,
                            std::span<const std::size_t> boundaries = {});
std::vector<std::string> tokenize_words(std::string_view utf8);

/// SemEval-2014 Task 4 XML. One TextInstance per aspect term; "conflict"
/// terms are dropped. Ids are "<sentence id>#<term index>".
std::vector<TextInstance> load_semeval_xml(const std::filesystem::path& path);
std::vector<TextInstance> parse_semeval_xml(std::string_view xml);

/// Three-line records: sentence with "$T$", target, label in {1, -1, 0}.
std::vector<TextInstance> load_twitter_3line(const std::filesystem::path& path);
std::vector<TextInstance> parse_twitter_3line(std::string_view text);

struct ClassCounts {
  std::size_t positive = 0, negative = 0, neutral = 0;
  std::size_t total() const { return positive + negative + neutral; }
};
ClassCounts count_labels(std::span<const TextInstance> instances);

class Vocabulary {
 public:
  static constexpr std::int32_t kMaskId = 0;
  static constexpr std::int32_t kUnkId = 1;
  static constexpr std::string_view kMaskToken = "<mask>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();
  /// Words after the two reserved entries, in id order.
  explicit Vocabulary(std::vector<std::string> words);

  std::size_t size() const { return words_.size(); }
  std::int32_t id(std::string_view word) const;  // kUnkId when absent
  bool contains(std::string_view word) const;
  const std::string& word(std::int32_t id) const;
  const std::vector<std::string>& words() const { return words_; }

  /// FNV-1a 64 over the words joined by '\n'.
  std::uint64_t hash() const;

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::int32_t> index_;
};

/// Every token with frequency >= min_count, ordered by frequency (desc) then
/// lexicographically, after <mask> and <unk>.
Vocabulary build_vocab(std::span<const TextInstance> instances, std::size_t min_count = 1);

Instance encode(const TextInstance& text, const Vocabulary& vocab);
std::vector<Instance> encode_all(std::span<const TextInstance> texts, const Vocabulary& vocab);
std::vector<std::string> decode(const Instance& instance, const Vocabulary& vocab);

/// Builds a |V| x dim matrix: rows for words present in `vectors` are copied,
/// all others drawn from Uniform[-0.25, 0.25] (drawn for every row, in id
/// order, before copying).
Tensor embedding_matrix(const Vocabulary& vocab, std::size_t dim,
                        const std::unordered_map<std::string, std::vector<double>>& vectors,
                        Rng& rng);

/// Whitespace-delimited word-vector text file (word followed by dim reals).
Tensor load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                       std::size_t dim, Rng& rng);

struct Split {
  std::vector<TextInstance> train;
  std::vector<TextInstance> validation;
};

/// Random held-out split; round(N * fraction) instances go to validation.
/// Both parts keep the input order.
Split split_heldout(std::span<const TextInstance> instances, double fraction, Rng& rng);
std::size_t heldout_size(std::size_t n, double fraction);

/// Returns a copy with tokens at `positions` replaced by <mask>.
Instance apply_mask(const Instance& instance, std::span<const std::size_t> positions);

/// Active (s_a) and misleading (s_m) positions of one instance, in extraction order.
struct SupervisionSets {
  std::vector<std::size_t> active;
  std::vector<std::size_t> misleading;

  std::vector<std::size_t> all() const;
  bool contains(std::size_t pos) const;
  std::size_t size() const { return active.size() + misleading.size(); }
  friend bool operator==(const SupervisionSets&, const SupervisionSets&) = default;
};

/// Checks disjointness, distinctness, bounds and aspect exclusion.
void validate(const SupervisionSets& sets, const Instance& instance);

/// Supervision sets keyed by instance id, remembering first-insertion order.
class SupervisionState {
 public:
  SupervisionSets& operator[](const std::string& id);
  const SupervisionSets* find(const std::string& id) const;
  const std::vector<std::string>& ids() const { return order_; }

 private:
  std::vector<std::string> order_;
  std::map<std::string, SupervisionSets> sets_;
};

// Normalized corpus: one JSON object per line {"id","tokens","aspect","label"}.
void save_corpus(const std::filesystem::path& path, std::span<const TextInstance> instances);
std::vector<TextInstance> load_corpus(const std::filesystem::path& path);
std::string corpus_line(const TextInstance& instance);

// Supervision-state file: one JSON object per line {"id","s_a","s_m"}.
void save_supervision(const std::filesystem::path& path, const SupervisionState& state);
SupervisionState load_supervision(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
std::string read_file(const std::filesystem::path& path);

}  // namespace pssa
