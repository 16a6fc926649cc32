#include <doctest.h>

#include <fstream>
#include <numeric>
#include <set>

#include "pssa/dataset.hpp"
#include "support.hpp"

using namespace pssa;

namespace {

const char* kSemeval = R"(<?xml version="1.0" encoding="UTF-8"?>
<sentences>
  <sentence id="2339">
    <text>The screen is huge and colorful, but no LED backlighting.</text>
    <aspectTerms>
      <aspectTerm term="screen" polarity="positive" from="4" to="10"/>
      <aspectTerm term="LED backlighting" polarity="negative" from="40" to="56"/>
    </aspectTerms>
  </sentence>
  <sentence id="12">
    <text>Battery life is ok.</text>
    <aspectTerms>
      <aspectTerm term="Battery life" polarity="neutral" from="0" to="12"/>
      <aspectTerm term="Battery" polarity="conflict" from="0" to="7"/>
    </aspectTerms>
  </sentence>
  <sentence id="13">
    <text>No aspects here.</text>
  </sentence>
</sentences>
)";

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("tokenizer") {
  CHECK(tokenize_words("The screen, isn't HUGE!") ==
        std::vector<std::string>{"the", "screen", ",", "isn", "'", "t", "huge", "!"});
  CHECK(tokenize_words("  a\tb \n c ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize_words("Écran café") == std::vector<std::string>{"écran", "café"});
  const std::size_t cut[] = {3};
  const auto toks = tokenize("abcdef", cut);
  REQUIRE(toks.size() == 2);
  CHECK(toks[0].text == "abc");
  CHECK(toks[1].begin == 3);
}

TEST_CASE("semeval xml") {
  const auto items = parse_semeval_xml(kSemeval);
  REQUIRE(items.size() == 3);
  CHECK(items[0].id == "2339#0");
  CHECK(items[0].tokens == std::vector<std::string>{"the", "screen", "is", "huge", "and",
                                                    "colorful", ",", "but", "no", "led",
                                                    "backlighting", "."});
  CHECK(items[0].aspect == std::vector<std::size_t>{1});
  CHECK(items[0].label == Sentiment::Positive);
  CHECK(items[1].aspect == std::vector<std::size_t>{9, 10});
  CHECK(items[1].label == Sentiment::Negative);
  CHECK(items[2].id == "12#0");
  CHECK(items[2].aspect == std::vector<std::size_t>{0, 1});
  CHECK(items[2].label == Sentiment::Neutral);

  const auto counts = count_labels(items);
  CHECK(counts.positive == 1);
  CHECK(counts.negative == 1);
  CHECK(counts.neutral == 1);
}

TEST_CASE("semeval span inside a word is re-tokenized") {
  const auto items = parse_semeval_xml(R"(<sentences><sentence id="7"><text>great batterylife</text>
    <aspectTerms><aspectTerm term="battery" polarity="positive" from="6" to="13"/></aspectTerms>
    </sentence></sentences>)");
  REQUIRE(items.size() == 1);
  CHECK(items[0].tokens == std::vector<std::string>{"great", "battery", "life"});
  CHECK(items[0].aspect == std::vector<std::size_t>{1});
}

TEST_CASE("semeval errors") {
  CHECK_THROWS_WITH_AS(parse_semeval_xml("<sentences>\n<sentence id=\"1\">\n<text>x</sentence>"),
                       doctest::Contains("malformed XML at line"), Error);
  CHECK_THROWS_WITH_AS(parse_semeval_xml(R"(<sentences><sentence id="9"><text>abc</text>
    <aspectTerms><aspectTerm term="z" polarity="positive" from="2" to="9"/></aspectTerms>
    </sentence></sentences>)"),
                       doctest::Contains("sentence 9"), Error);
  CHECK_THROWS_WITH_AS(parse_semeval_xml(R"(<sentences><sentence id="10"><text>a  b</text>
    <aspectTerms><aspectTerm term=" " polarity="positive" from="1" to="2"/></aspectTerms>
    </sentence></sentences>)"),
                       doctest::Contains("sentence 10"), Error);
}

TEST_CASE("semeval file with only conflict terms") {
  const auto items = parse_semeval_xml(R"(<sentences><sentence id="1"><text>ok food</text>
    <aspectTerms><aspectTerm term="food" polarity="conflict" from="3" to="7"/></aspectTerms>
    </sentence></sentences>)");
  CHECK(items.empty());
}

TEST_CASE("twitter three-line records") {
  const auto items = parse_twitter_3line("i love $T$ !\napple\n1\n$T$ is awful\nmy phone\n-1\n");
  REQUIRE(items.size() == 2);
  CHECK(items[0].tokens == std::vector<std::string>{"i", "love", "apple", "!"});
  CHECK(items[0].aspect == std::vector<std::size_t>{2});
  CHECK(items[0].label == Sentiment::Positive);
  CHECK(items[1].tokens == std::vector<std::string>{"my", "phone", "is", "awful"});
  CHECK(items[1].aspect == std::vector<std::size_t>{0, 1});
  CHECK(items[1].label == Sentiment::Negative);
  CHECK(parse_twitter_3line("ok $T$\nx\n0\n")[0].label == Sentiment::Neutral);

  CHECK_THROWS_WITH_AS(parse_twitter_3line("a $T$\nb\n"), doctest::Contains("multiple of 3"), Error);
  CHECK_THROWS_WITH_AS(parse_twitter_3line("a $T$\nb\n2\n"), doctest::Contains("unknown label"),
                       Error);
}

TEST_CASE("vocabulary") {
  const std::vector<TextInstance> corpus{{"x", {"a", "a", "b"}, {0}, Sentiment::Positive}};
  const auto v1 = build_vocab(corpus, 1);
  CHECK(v1.words() == std::vector<std::string>{"<mask>", "<unk>", "a", "b"});
  CHECK(v1.id("<mask>") == Vocabulary::kMaskId);
  CHECK(v1.id("<unk>") == Vocabulary::kUnkId);

  const auto v2 = build_vocab(corpus, 2);
  CHECK(v2.id("b") == Vocabulary::kUnkId);
  CHECK(v2.id("a") == 2);

  CHECK(build_vocab(corpus, 1).hash() == v1.hash());
  CHECK(v1.hash() != v2.hash());
  CHECK_THROWS_AS(build_vocab(std::vector<TextInstance>{}, 1), Error);

  const std::vector<TextInstance> ties{{"y", {"d", "c", "c", "b", "d"}, {0}, Sentiment::Neutral}};
  CHECK(build_vocab(ties, 1).words() ==
        std::vector<std::string>{"<mask>", "<unk>", "c", "d", "b"});

  const auto dir = testing::scratch_dir("vocab");
  v1.save(dir / "v.txt");
  CHECK(Vocabulary::load(dir / "v.txt").words() == v1.words());
}

TEST_CASE("encode and decode round trip") {
  const std::vector<TextInstance> corpus{{"x", {"a", "a", "b", "c"}, {1}, Sentiment::Positive}};
  const auto vocab = build_vocab(corpus, 2);
  const auto inst = encode(corpus[0], vocab);
  CHECK(inst.aspect == std::vector<std::size_t>{1});
  CHECK(decode(inst, vocab) == std::vector<std::string>{"a", "a", "<unk>", "<unk>"});
}

TEST_CASE("embeddings") {
  const auto dir = testing::scratch_dir("emb");
  const std::vector<TextInstance> corpus{{"x", {"good", "bad"}, {0}, Sentiment::Positive}};
  const auto vocab = build_vocab(corpus, 1);

  SUBCASE("empty file means all rows random in range") {
    write(dir / "empty.txt", "");
    Rng rng(1);
    const auto m = load_embeddings(dir / "empty.txt", vocab, 4, rng);
    CHECK(m.rows() == vocab.size());
    for (double x : m.values()) {
      CHECK(x >= -0.25);
      CHECK(x <= 0.25);
    }
  }
  SUBCASE("listed rows are copied exactly") {
    std::string line = "good";
    std::vector<double> vals;
    for (int i = 0; i < 300; ++i) {
      vals.push_back(0.001 * i - 0.1);
      line += " " + std::to_string(vals.back());
    }
    write(dir / "good.txt", line + "\n");
    Rng rng(2);
    const auto m = load_embeddings(dir / "good.txt", vocab, 300, rng);
    const auto row = m.row(static_cast<std::size_t>(vocab.id("good")));
    for (int i = 0; i < 300; ++i) CHECK(row[i] == std::stod(std::to_string(vals[i])));
  }
  SUBCASE("wrong arity names the line") {
    write(dir / "bad.txt", "good 0.1 0.2 0.3 0.4\nbad 0.1 0.2\n");
    Rng rng(3);
    CHECK_THROWS_WITH_AS(load_embeddings(dir / "bad.txt", vocab, 4, rng),
                         doctest::Contains("line 2"), Error);
  }
  SUBCASE("out-of-vocabulary rows are uniform on [-0.25, 0.25]") {
    std::vector<std::string> words;
    for (int i = 0; i < 10000; ++i) words.push_back("w" + std::to_string(i));
    const Vocabulary big(words);
    Rng rng(4);
    const auto m = embedding_matrix(big, 1, {}, rng);
    const auto v = m.values();
    CHECK(*std::min_element(v.begin(), v.end()) >= -0.25);
    CHECK(*std::max_element(v.begin(), v.end()) <= 0.25);
    CHECK(std::abs(std::accumulate(v.begin(), v.end(), 0.0) / v.size()) < 0.01);
  }
}

TEST_CASE("held-out split") {
  std::vector<TextInstance> items;
  for (int i = 0; i < 10; ++i) items.push_back({"i" + std::to_string(i), {"a"}, {0}, Sentiment::Positive});
  Rng a(8), b(8);
  const auto s1 = split_heldout(items, 0.2, a);
  const auto s2 = split_heldout(items, 0.2, b);
  CHECK(s1.train.size() == 8);
  CHECK(s1.validation.size() == 2);
  std::vector<std::string> ids1, ids2;
  for (const auto& t : s1.validation) ids1.push_back(t.id);
  for (const auto& t : s2.validation) ids2.push_back(t.id);
  CHECK(ids1 == ids2);

  std::set<std::string> all;
  for (const auto& t : s1.train) all.insert(t.id);
  for (const auto& t : s1.validation) all.insert(t.id);
  CHECK(all.size() == 10);

  CHECK(heldout_size(2292, 0.2) == 458);
  std::vector<TextInstance> laptop(2292, items[0]);
  for (std::size_t i = 0; i < laptop.size(); ++i) laptop[i].id = std::to_string(i);
  Rng c(1);
  const auto s3 = split_heldout(laptop, 0.2, c);
  CHECK(s3.validation.size() == 458);
  CHECK(s3.train.size() == 1834);

  Rng d(1);
  CHECK_THROWS_AS(split_heldout(std::span(items).first(4), 0.2, d), Error);
}

TEST_CASE("apply_mask") {
  Instance inst{"m", {5, 6, 7, 8}, {1}, Sentiment::Positive};
  CHECK(apply_mask(inst, {}).tokens == inst.tokens);
  const std::size_t p[] = {3};
  const auto masked = apply_mask(inst, p);
  CHECK(masked.tokens == std::vector<std::int32_t>{5, 6, 7, Vocabulary::kMaskId});
  CHECK(inst.tokens[3] == 8);
  CHECK(apply_mask(masked, p).tokens == masked.tokens);
  const std::size_t all[] = {0, 2, 3};
  CHECK(apply_mask(inst, all).tokens ==
        std::vector<std::int32_t>{Vocabulary::kMaskId, 6, Vocabulary::kMaskId, Vocabulary::kMaskId});
  const std::size_t aspect[] = {1};
  CHECK_THROWS_AS(apply_mask(inst, aspect), Error);
  const std::size_t out[] = {4};
  CHECK_THROWS_AS(apply_mask(inst, out), Error);
}

TEST_CASE("supervision state keeps insertion order and round trips") {
  SupervisionState state;
  state["b"].active = {2, 0};
  state["a"].misleading = {1};
  state["b"].misleading = {3};
  CHECK(state.ids() == std::vector<std::string>{"b", "a"});
  const auto dir = testing::scratch_dir("sup");
  save_supervision(dir / "s.jsonl", state);
  const auto back = load_supervision(dir / "s.jsonl");
  CHECK(back.ids() == state.ids());
  CHECK(*back.find("b") == *state.find("b"));
  CHECK(back.find("b")->active == std::vector<std::size_t>{2, 0});

  Instance inst{"b", {5, 6, 7, 8}, {1}, Sentiment::Positive};
  CHECK_NOTHROW(validate(*state.find("b"), inst));
  SupervisionSets overlap{{2}, {2}};
  CHECK_THROWS_AS(validate(overlap, inst), Error);
  SupervisionSets on_aspect{{1}, {}};
  CHECK_THROWS_AS(validate(on_aspect, inst), Error);
}

TEST_CASE("normalized corpus round trip") {
  const std::vector<TextInstance> items{{"s#0", {"the", "[screen]", "\"x\""}, {1}, Sentiment::Negative},
                                        {"s#1", {"ok"}, {0}, Sentiment::Neutral}};
  const auto dir = testing::scratch_dir("corpus");
  save_corpus(dir / "c.jsonl", items);
  const auto back = load_corpus(dir / "c.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[0].tokens == items[0].tokens);
  CHECK(back[0].aspect == items[0].aspect);
  CHECK(back[0].label == items[0].label);
  CHECK(back[1].id == "s#1");
  CHECK(corpus_line(items[1]) == R"({"id":"s#1","tokens":["ok"],"aspect":[0],"label":"neutral"})");
}
