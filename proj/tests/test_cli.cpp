#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pssa/pipeline.hpp"
#include "pssa/report.hpp"
#include "support.hpp"

using namespace pssa;
namespace fs = std::filesystem;

namespace {

const char* kXml = R"(<?xml version="1.0" encoding="UTF-8"?>
<sentences>
  <sentence id="1"><text>The screen is bright and the keys feel great.</text>
    <aspectTerms>
      <aspectTerm term="screen" polarity="positive" from="4" to="10"/>
      <aspectTerm term="keys" polarity="positive" from="29" to="33"/>
    </aspectTerms></sentence>
  <sentence id="2"><text>Battery life is awful.</text>
    <aspectTerms><aspectTerm term="Battery life" polarity="negative" from="0" to="12"/></aspectTerms></sentence>
  <sentence id="3"><text>The price seems fair I guess.</text>
    <aspectTerms><aspectTerm term="price" polarity="neutral" from="4" to="9"/></aspectTerms></sentence>
  <sentence id="4"><text>The fan is loud and the case is cheap.</text>
    <aspectTerms>
      <aspectTerm term="fan" polarity="negative" from="4" to="7"/>
      <aspectTerm term="case" polarity="negative" from="24" to="28"/>
    </aspectTerms></sentence>
  <sentence id="5"><text>The trackpad is smooth.</text>
    <aspectTerms><aspectTerm term="trackpad" polarity="positive" from="4" to="12"/></aspectTerms></sentence>
</sentences>
)";

std::string slurp(const fs::path& p) { return read_file(p); }

int run_binary(const std::string& args) {
  const std::string cmd = std::string(PSSA_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig tiny_synthetic(const fs::path& out, RunMode mode) {
  RunConfig c;
  c.dataset = "synthetic";
  c.mode = mode;
  c.dim = 10;
  c.epochs = 3;
  c.k = 2;
  c.epsilon = 1.2;
  c.gamma = 0.5;
  c.noise_n = 2;
  c.bootstrap_n = 20;
  c.synthetic_train = 80;
  c.synthetic_test = 40;
  c.out = out.string();
  return c;
}

}  // namespace

TEST_CASE("config text") {
  RunConfig c;
  apply_config_text(c,
                    "# comment\n"
                    "dataset = synthetic\n"
                    "mode = aw-as   # inline\n"
                    "epsilon = 2.5\n"
                    "batch = 16\n"
                    "warm_start = true\n",
                    "test.cfg");
  CHECK(c.dataset == "synthetic");
  CHECK(c.mode == RunMode::AwAs);
  CHECK(c.effective_epsilon() == 2.5);
  CHECK(c.batch == 16);
  CHECK(c.warm_start);
  CHECK(c.effective_saliency() == SaliencyMode::AttentionWeight);

  CHECK_THROWS_WITH_AS(apply_config_text(c, "epsilonn = 1\n", "x.cfg"),
                       doctest::Contains("x.cfg:1"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(c, "k = many\n", "x.cfg"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(c, "no equals sign\n", "x.cfg"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "mode", "aw"), ConfigError);
}

TEST_CASE("config defaults and validation") {
  RunConfig c;
  c.dataset = "data/laptop";
  CHECK(c.effective_epsilon() == 3.0);
  CHECK(c.effective_gamma() == 0.1);
  c.dataset = "data/rest";
  CHECK(c.effective_gamma() == 0.5);
  c.mode = RunMode::RandomMask;
  CHECK(c.effective_saliency() == SaliencyMode::PartialGradient);
  CHECK_NOTHROW(validate(c));
  c.k = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.k = 5;
  c.epsilon = -1.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  RunConfig empty;
  CHECK_THROWS_AS(validate(empty), ConfigError);
}

TEST_CASE("config snapshot reproduces the config") {
  RunConfig c;
  c.dataset = "synthetic";
  c.mode = RunMode::MisleadingOnly;
  c.noise_sigma = 0.1 + 0.2;
  c.seed = 12345678901234ULL;
  const auto snap = config_snapshot(c);
  RunConfig back;
  apply_config_text(back, snap, "snapshot");
  CHECK(config_snapshot(back) == snap);
  CHECK(back.noise_sigma == c.noise_sigma);
  CHECK(back.seed == c.seed);
  for (const auto& key : config_keys()) CHECK(snap.find("\n" + key + " = ") != std::string::npos);
}

TEST_CASE("output directory") {
  RunConfig c;
  c.dataset = "data/laptop";
  c.mode = RunMode::PgAs;
  c.seed = 3;
  ::setenv("PSSA_OUT_ROOT", "/tmp/root", 1);
  CHECK(output_directory(c) == fs::path("/tmp/root/laptop-pg-as-s3"));
  ::unsetenv("PSSA_OUT_ROOT");
  CHECK(output_directory(c) == fs::path("runs/laptop-pg-as-s3"));
  c.out = "elsewhere";
  CHECK(output_directory(c) == fs::path("elsewhere"));
}

TEST_CASE("prepare is reproducible") {
  const auto dir = testing::scratch_dir("prepare");
  std::ofstream(dir / "train.xml") << kXml;
  std::ofstream(dir / "test.xml") << kXml;
  PrepareOptions o;
  o.train = dir / "train.xml";
  o.test = dir / "test.xml";
  o.out = dir / "a";
  std::ostringstream log1, log2;
  const auto summary = cmd_prepare(o, log1);
  CHECK(summary.train.positive == 3);
  CHECK(summary.train.negative == 3);
  CHECK(summary.train.neutral == 1);
  CHECK(summary.validation_size == 1);
  CHECK(log1.str().find("train: Pos 3 Neg 3 Neu 1") != std::string::npos);
  o.out = dir / "b";
  cmd_prepare(o, log2);
  for (const char* f : {"train.jsonl", "test.jsonl", "vocab.txt", "split.json", "manifest.json"}) {
    CAPTURE(f);
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK(log1.str() == log2.str());

  CHECK_THROWS_AS(parse_corpus_format("csv"), ConfigError);
  CHECK(parse_corpus_format("twitter-3line") == CorpusFormat::Twitter3Line);
}

TEST_CASE("command-line exit codes") {
  const auto dir = testing::scratch_dir("exit_codes");
  std::ofstream(dir / "train.xml") << kXml;
  CHECK(run_binary("--help") == 0);
  CHECK(run_binary("") == 2);
  CHECK(run_binary("prepare --format csv --train " + (dir / "train.xml").string() + " --out " +
                   (dir / "p").string()) == 2);
  CHECK(run_binary("run --dataset synthetic --no-such-flag 1") == 2);
  CHECK(run_binary("run --dataset synthetic --k 0") == 2);
  CHECK(run_binary("run --dataset " + (dir / "missing").string() + " --out " +
                   (dir / "r").string()) == 1);
  CHECK(run_binary("prepare --format semeval-xml --train " + (dir / "train.xml").string() + " --out " +
                   (dir / "p").string()) == 0);
  CHECK(fs::exists(dir / "p" / "vocab.txt"));
}

TEST_CASE("baseline mode writes no mining artifacts") {
  const auto dir = testing::scratch_dir("baseline_mode");
  std::ostringstream log;
  const auto summary = cmd_run(tiny_synthetic(dir, RunMode::Baseline), log);
  CHECK_FALSE(summary.mining);
  CHECK_FALSE(summary.enhanced);
  CHECK(fs::exists(dir / "baseline.ckpt"));
  CHECK(fs::exists(dir / "metrics.txt"));
  CHECK(fs::exists(dir / "config.txt"));
  CHECK_FALSE(fs::exists(dir / "mining_log.jsonl"));
  CHECK_FALSE(fs::exists(dir / "supervision.jsonl"));
  CHECK_FALSE(fs::exists(dir / "enhanced.ckpt"));
}

TEST_CASE("misleading-only supervision") {
  const auto dir = testing::scratch_dir("misleading_only");
  std::ostringstream log;
  cmd_run(tiny_synthetic(dir, RunMode::MisleadingOnly), log);
  const auto state = load_supervision(dir / "supervision.jsonl");
  std::size_t misleading = 0;
  for (const auto& id : state.ids()) {
    const auto* sets = state.find(id);
    CHECK(sets->active.empty());
    misleading += sets->misleading.size();
  }
  CHECK(misleading > 0);
  CHECK(fs::exists(dir / "enhanced.ckpt"));
}

TEST_CASE("report checks its inputs") {
  const auto dir = testing::scratch_dir("report");
  std::ostringstream log;
  cmd_run(tiny_synthetic(dir / "run", RunMode::PgAs), log);

  ReportOptions o;
  o.log = dir / "run" / "mining_log.jsonl";
  o.corpus = dir / "run" / "train.jsonl";
  o.vocab = dir / "run" / "vocab.txt";
  o.checkpoint = dir / "run" / "enhanced.ckpt";
  o.out = dir / "out";
  o.limit = 5;
  std::ostringstream out;
  cmd_report(o, out);
  const auto text = slurp(dir / "out" / "report.txt");
  const auto html = slurp(dir / "out" / "report.html");
  CHECK(text.find("Iter 1") != std::string::npos);
  CHECK(text.find("Final") != std::string::npos);
  CHECK(html.find("<html") != std::string::npos);
  CHECK(html.find("http") == std::string::npos);
  CHECK(html.find("<script") == std::string::npos);

  auto changed = slurp(o.corpus);
  std::ofstream(dir / "other.jsonl", std::ios::binary) << changed << corpus_line({"extra", {"a", "b"}, {0}, Sentiment::Neutral}) << '\n';
  o.corpus = dir / "other.jsonl";
  CHECK_THROWS_WITH_AS(cmd_report(o, out), doctest::Contains("corpus"), Error);
}

TEST_CASE("evaluate scores a checkpoint") {
  const auto dir = testing::scratch_dir("evaluate");
  std::ostringstream log, out;
  const auto summary = cmd_run(tiny_synthetic(dir, RunMode::Baseline), log);
  fs::path test = dir / "test.jsonl";
  const auto data = load_run_data(tiny_synthetic(dir, RunMode::Baseline));
  save_corpus(test, data.test);
  const auto preds = cmd_evaluate(dir / "baseline.ckpt", test, dir / "vocab.txt", out);
  CHECK(accuracy(preds) == accuracy(summary.baseline));
  CHECK(out.str().find("accuracy") != std::string::npos);
}
