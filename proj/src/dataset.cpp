#include "pssa/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fmt/format.h>
#include <json.hpp>

namespace pssa {

using json = nlohmann::json;

std::string_view to_string(Sentiment s) {
  switch (s) {
    case Sentiment::Positive: return "positive";
    case Sentiment::Negative: return "negative";
    case Sentiment::Neutral: return "neutral";
  }
  return "?";
}

Sentiment parse_sentiment(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "positive" || lower == "pos") return Sentiment::Positive;
  if (lower == "negative" || lower == "neg") return Sentiment::Negative;
  if (lower == "neutral" || lower == "neu") return Sentiment::Neutral;
  throw Error(fmt::format("unknown sentiment label '{}'", text));
}

Sentiment sentiment_from_code(int c) {
  if (c < 0 || c > 2) throw Error(fmt::format("invalid sentiment code {}", c));
  return static_cast<Sentiment>(c);
}

bool Instance::is_aspect(std::size_t pos) const {
  return std::binary_search(aspect.begin(), aspect.end(), pos);
}

void validate(const Instance& instance) {
  if (instance.tokens.empty()) throw Error(fmt::format("instance {}: no tokens", instance.id));
  if (instance.aspect.empty()) throw Error(fmt::format("instance {}: no aspect positions", instance.id));
  if (!std::is_sorted(instance.aspect.begin(), instance.aspect.end()) ||
      std::adjacent_find(instance.aspect.begin(), instance.aspect.end()) != instance.aspect.end()) {
    throw Error(fmt::format("instance {}: aspect positions must be sorted and distinct", instance.id));
  }
  if (instance.aspect.back() >= instance.tokens.size()) {
    throw Error(fmt::format("instance {}: aspect position out of range", instance.id));
  }
}

// ---------------------------------------------------------------- tokenizer

namespace {

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    char32_t cp;
    std::size_t len;
    if (c < 0x80) { cp = c; len = 1; }
    else if ((c >> 5) == 0x6) { cp = c & 0x1F; len = 2; }
    else if ((c >> 4) == 0xE) { cp = c & 0x0F; len = 3; }
    else if ((c >> 3) == 0x1E) { cp = c & 0x07; len = 4; }
    else { out.push_back(char32_t{0xFFFD}); ++i; continue; }
    if (i + len > s.size()) { out.push_back(char32_t{0xFFFD}); break; }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc >> 6) != 0x2) { ok = false; break; }
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) { out.push_back(char32_t{0xFFFD}); ++i; continue; }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' || c == U'\f' ||
         c == 0xA0 || (c >= 0x2000 && c <= 0x200B) || c == 0x3000 || c == 0xFEFF;
}

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  return c == 0xA1 || c == 0xAB || c == 0xBB || c == 0xBF ||
         (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E);
}

char32_t lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  return c;
}

}  // namespace

std::vector<Token> tokenize(std::string_view utf8, std::span<const std::size_t> boundaries) {
  const auto text = decode_utf8(utf8);
  std::vector<Token> out;
  std::string current;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    if (!current.empty()) out.push_back({std::move(current), start, end});
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char32_t c = text[i];
    if (std::find(boundaries.begin(), boundaries.end(), i) != boundaries.end()) flush(i);
    if (is_space(c)) {
      flush(i);
    } else if (is_punct(c)) {
      flush(i);
      std::string p;
      append_utf8(p, c);
      out.push_back({std::move(p), i, i + 1});
    } else {
      if (current.empty()) start = i;
      append_utf8(current, lower(c));
    }
  }
  flush(text.size());
  return out;
}

std::vector<std::string> tokenize_words(std::string_view utf8) {
  std::vector<std::string> words;
  for (auto& t : tokenize(utf8)) words.push_back(std::move(t.text));
  return words;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ------------------------------------------------------------------ SemEval

std::vector<TextInstance> parse_semeval_xml(std::string_view xml) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(xml)};
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error(fmt::format("malformed XML at line {}: {}", e.line(), e.message()));
  }

  std::vector<TextInstance> out;
  const auto root = tree.get_child_optional("sentences");
  if (!root) throw Error("malformed XML: missing <sentences> root");
  for (const auto& [tag, sentence] : *root) {
    if (tag != "sentence") continue;
    const auto sid = sentence.get<std::string>("<xmlattr>.id", "");
    const auto text = sentence.get<std::string>("text", "");
    const auto terms = sentence.get_child_optional("aspectTerms");
    if (!terms) continue;
    const std::size_t length = decode_utf8(text).size();
    std::size_t term_index = 0;
    for (const auto& [ttag, term] : *terms) {
      if (ttag != "aspectTerm") continue;
      const std::size_t index = term_index++;
      const auto polarity = term.get<std::string>("<xmlattr>.polarity", "");
      if (polarity == "conflict") continue;
      TextInstance inst;
      inst.id = fmt::format("{}#{}", sid, index);
      inst.label = parse_sentiment(polarity);
      const auto from = term.get<std::size_t>("<xmlattr>.from");
      const auto to = term.get<std::size_t>("<xmlattr>.to");
      if (from >= to || to > length) {
        throw Error(fmt::format("sentence {}: aspect span [{}, {}) is invalid", sid, from, to));
      }
      const std::size_t cuts[] = {from, to};
      for (auto& tok : tokenize(text, cuts)) {
        if (tok.begin >= from && tok.end <= to) inst.aspect.push_back(inst.tokens.size());
        inst.tokens.push_back(std::move(tok.text));
      }
      if (inst.aspect.empty()) {
        throw Error(fmt::format("sentence {}: aspect span [{}, {}) covers no token", sid, from, to));
      }
      out.push_back(std::move(inst));
    }
  }
  return out;
}

std::vector<TextInstance> load_semeval_xml(const std::filesystem::path& path) {
  try {
    return parse_semeval_xml(read_file(path));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

// ------------------------------------------------------------------ Twitter

std::vector<TextInstance> parse_twitter_3line(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line(text.substr(pos, nl - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() % 3 != 0) {
    throw Error(fmt::format("twitter file has {} lines, not a multiple of 3", lines.size()));
  }

  std::vector<TextInstance> out;
  for (std::size_t r = 0; r < lines.size(); r += 3) {
    const auto& sentence = lines[r];
    const auto& target = lines[r + 1];
    std::string label = lines[r + 2];
    label.erase(0, label.find_first_not_of(" \t"));
    label.erase(label.find_last_not_of(" \t") + 1);
    const std::size_t line_no = r + 1;

    TextInstance inst;
    inst.id = fmt::format("tw{}", r / 3);
    if (label == "1") inst.label = Sentiment::Positive;
    else if (label == "-1") inst.label = Sentiment::Negative;
    else if (label == "0") inst.label = Sentiment::Neutral;
    else throw Error(fmt::format("line {}: unknown label '{}'", line_no + 2, label));

    const auto slot = sentence.find("$T$");
    if (slot == std::string::npos) {
      throw Error(fmt::format("line {}: sentence has no $T$ placeholder", line_no));
    }
    inst.tokens = tokenize_words(std::string_view(sentence).substr(0, slot));
    for (auto& w : tokenize_words(target)) {
      inst.aspect.push_back(inst.tokens.size());
      inst.tokens.push_back(std::move(w));
    }
    if (inst.aspect.empty()) throw Error(fmt::format("line {}: empty target", line_no + 1));
    for (auto& w : tokenize_words(std::string_view(sentence).substr(slot + 3))) {
      inst.tokens.push_back(std::move(w));
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<TextInstance> load_twitter_3line(const std::filesystem::path& path) {
  try {
    return parse_twitter_3line(read_file(path));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

ClassCounts count_labels(std::span<const TextInstance> instances) {
  ClassCounts c;
  for (const auto& i : instances) {
    switch (i.label) {
      case Sentiment::Positive: ++c.positive; break;
      case Sentiment::Negative: ++c.negative; break;
      case Sentiment::Neutral: ++c.neutral; break;
    }
  }
  return c;
}

// --------------------------------------------------------------- vocabulary

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(std::vector<std::string> words) {
  words_.reserve(words.size() + 2);
  words_.emplace_back(kMaskToken);
  words_.emplace_back(kUnkToken);
  for (auto& w : words) {
    if (w == kMaskToken || w == kUnkToken) continue;
    words_.push_back(std::move(w));
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<std::int32_t>(i)).second) {
      throw Error(fmt::format("duplicate vocabulary entry '{}'", words_[i]));
    }
  }
}

std::int32_t Vocabulary::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view word) const {
  return index_.count(std::string(word)) > 0;
}

const std::string& Vocabulary::word(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw Error(fmt::format("vocabulary id {} out of range", id));
  }
  return words_[static_cast<std::size_t>(id)];
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& w : words_) {
    h = fnv1a64(w, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  for (const auto& w : words_) out << w << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path.string()));
  std::vector<std::string> words;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (n == 1 && line != kMaskToken) throw Error("vocabulary file must start with <mask>");
    if (n == 2 && line != kUnkToken) throw Error("vocabulary file must list <unk> second");
    if (n > 2) words.push_back(line);
  }
  if (n < 2) throw Error(fmt::format("{}: truncated vocabulary", path.string()));
  return Vocabulary(std::move(words));
}

Vocabulary build_vocab(std::span<const TextInstance> instances, std::size_t min_count) {
  if (min_count < 1) throw std::invalid_argument("build_vocab: min_count must be >= 1");
  if (instances.empty()) throw Error("build_vocab: empty corpus");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& inst : instances) {
    for (const auto& t : inst.tokens) ++counts[t];
  }
  std::vector<std::pair<std::string, std::size_t>> entries;
  for (auto& [w, c] : counts) {
    if (c >= min_count && w != Vocabulary::kMaskToken && w != Vocabulary::kUnkToken) {
      entries.emplace_back(w, c);
    }
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(entries.size());
  for (auto& e : entries) words.push_back(std::move(e.first));
  return Vocabulary(std::move(words));
}

Instance encode(const TextInstance& text, const Vocabulary& vocab) {
  Instance inst;
  inst.id = text.id;
  inst.label = text.label;
  inst.aspect = text.aspect;
  inst.tokens.reserve(text.tokens.size());
  for (const auto& t : text.tokens) inst.tokens.push_back(vocab.id(t));
  validate(inst);
  return inst;
}

std::vector<Instance> encode_all(std::span<const TextInstance> texts, const Vocabulary& vocab) {
  std::vector<Instance> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(encode(t, vocab));
  return out;
}

std::vector<std::string> decode(const Instance& instance, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(instance.tokens.size());
  for (auto id : instance.tokens) out.push_back(vocab.word(id));
  return out;
}

// --------------------------------------------------------------- embeddings

Tensor embedding_matrix(const Vocabulary& vocab, std::size_t dim,
                        const std::unordered_map<std::string, std::vector<double>>& vectors,
                        Rng& rng) {
  Tensor out = uniform_tensor({vocab.size(), dim}, -0.25, 0.25, rng);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    auto it = vectors.find(vocab.word(static_cast<std::int32_t>(i)));
    if (it == vectors.end()) continue;
    if (it->second.size() != dim) {
      throw Error(fmt::format("vector for '{}' has dimension {}, expected {}", it->first,
                              it->second.size(), dim));
    }
    std::copy(it->second.begin(), it->second.end(), out.row(i).begin());
  }
  return out;
}

Tensor load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                       std::size_t dim, Rng& rng) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path.string()));
  std::unordered_map<std::string, std::vector<double>> vectors;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> fields;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fields.clear();
    std::string_view rest(line);
    while (true) {
      const auto b = rest.find_first_not_of(" \t");
      if (b == std::string_view::npos) break;
      rest.remove_prefix(b);
      const auto e = std::min(rest.find_first_of(" \t"), rest.size());
      fields.push_back(rest.substr(0, e));
      rest.remove_prefix(e);
    }
    if (fields.empty()) continue;
    if (fields.size() != dim + 1) {
      throw Error(fmt::format("{}: line {}: expected {} fields, found {}", path.string(), line_no,
                              dim + 1, fields.size()));
    }
    const std::string word(fields[0]);
    if (!vocab.contains(word) || vectors.count(word)) continue;
    std::vector<double> vec(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const auto f = fields[k + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), vec[k]);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(vec[k])) {
        throw Error(fmt::format("{}: line {}: bad number '{}'", path.string(), line_no, f));
      }
    }
    vectors.emplace(word, std::move(vec));
  }
  return embedding_matrix(vocab, dim, vectors, rng);
}

// -------------------------------------------------------------------- split

std::size_t heldout_size(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
}

Split split_heldout(std::span<const TextInstance> instances, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split_heldout: fraction must lie in (0, 1)");
  }
  if (instances.size() < 5) throw Error("split_heldout: need at least 5 instances");
  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  const std::size_t n_val = heldout_size(instances.size(), fraction);
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  Split s;
  for (auto i : train) s.train.push_back(instances[i]);
  for (auto i : val) s.validation.push_back(instances[i]);
  return s;
}

// ------------------------------------------------------------------ masking

Instance apply_mask(const Instance& instance, std::span<const std::size_t> positions) {
  Instance out = instance;
  for (auto p : positions) {
    if (p >= instance.tokens.size()) {
      throw Error(fmt::format("instance {}: mask position {} out of range", instance.id, p));
    }
    if (instance.is_aspect(p)) {
      throw Error(fmt::format("instance {}: cannot mask aspect position {}", instance.id, p));
    }
    out.tokens[p] = Vocabulary::kMaskId;
  }
  return out;
}

std::vector<std::size_t> SupervisionSets::all() const {
  std::vector<std::size_t> out = active;
  out.insert(out.end(), misleading.begin(), misleading.end());
  return out;
}

bool SupervisionSets::contains(std::size_t pos) const {
  return std::find(active.begin(), active.end(), pos) != active.end() ||
         std::find(misleading.begin(), misleading.end(), pos) != misleading.end();
}

void validate(const SupervisionSets& sets, const Instance& instance) {
  auto positions = sets.all();
  for (auto p : positions) {
    if (p >= instance.tokens.size()) {
      throw Error(fmt::format("instance {}: supervision position {} out of range", instance.id, p));
    }
    if (instance.is_aspect(p)) {
      throw Error(fmt::format("instance {}: supervision position {} is an aspect", instance.id, p));
    }
  }
  std::sort(positions.begin(), positions.end());
  if (std::adjacent_find(positions.begin(), positions.end()) != positions.end()) {
    throw Error(fmt::format("instance {}: s_a and s_m overlap or repeat", instance.id));
  }
}

SupervisionSets& SupervisionState::operator[](const std::string& id) {
  auto [it, inserted] = sets_.try_emplace(id);
  if (inserted) order_.push_back(id);
  return it->second;
}

const SupervisionSets* SupervisionState::find(const std::string& id) const {
  auto it = sets_.find(id);
  return it == sets_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------- io

std::string corpus_line(const TextInstance& instance) {
  nlohmann::ordered_json j;
  j["id"] = instance.id;
  j["tokens"] = instance.tokens;
  j["aspect"] = instance.aspect;
  j["label"] = std::string(to_string(instance.label));
  return j.dump();
}

void save_corpus(const std::filesystem::path& path, std::span<const TextInstance> instances) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  for (const auto& inst : instances) out << corpus_line(inst) << '\n';
}

std::vector<TextInstance> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path.string()));
  std::vector<TextInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      TextInstance inst;
      inst.id = j.at("id").get<std::string>();
      inst.tokens = j.at("tokens").get<std::vector<std::string>>();
      inst.aspect = j.at("aspect").get<std::vector<std::size_t>>();
      inst.label = parse_sentiment(j.at("label").get<std::string>());
      if (inst.tokens.empty() || inst.aspect.empty()) throw Error("empty tokens or aspect");
      std::sort(inst.aspect.begin(), inst.aspect.end());
      if (inst.aspect.back() >= inst.tokens.size()) throw Error("aspect position out of range");
      out.push_back(std::move(inst));
    } catch (const std::exception& e) {
      throw Error(fmt::format("{}: line {}: {}", path.string(), line_no, e.what()));
    }
  }
  return out;
}

void save_supervision(const std::filesystem::path& path, const SupervisionState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  for (const auto& id : state.ids()) {
    const auto* sets = state.find(id);
    nlohmann::ordered_json j;
    j["id"] = id;
    j["s_a"] = sets->active;
    j["s_m"] = sets->misleading;
    out << j.dump() << '\n';
  }
}

SupervisionState load_supervision(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path.string()));
  SupervisionState state;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      auto& sets = state[j.at("id").get<std::string>()];
      sets.active = j.at("s_a").get<std::vector<std::size_t>>();
      sets.misleading = j.at("s_m").get<std::vector<std::size_t>>();
      auto all = sets.all();
      std::sort(all.begin(), all.end());
      if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
        throw Error("s_a and s_m overlap or repeat");
      }
    } catch (const std::exception& e) {
      throw Error(fmt::format("{}: line {}: {}", path.string(), line_no, e.what()));
    }
  }
  return state;
}

}  // namespace pssa
