#include "pssa/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "pssa/synthetic.hpp"

namespace pssa {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Sub-stream ids derived from the run seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kEmbeddingStream = 2;
constexpr std::uint64_t kMiningStream = 3;
constexpr std::uint64_t kBootstrapStream = 4;
constexpr std::uint64_t kSplitStream = 5;

template <typename F>
auto stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw Error(fmt::format("write failed: {}", path.string()));
}

json counts_json(const ClassCounts& c) {
  return json{{"positive", c.positive}, {"negative", c.negative}, {"neutral", c.neutral}};
}

std::vector<TextInstance> drop_contextless(std::vector<TextInstance> items, std::ostream& log,
                                           const std::string& what) {
  const auto before = items.size();
  std::erase_if(items, [](const TextInstance& t) { return t.aspect.size() >= t.tokens.size(); });
  if (items.size() != before) {
    log << fmt::format("{}: skipped {} instance(s) without context words\n", what,
                       before - items.size());
  }
  return items;
}

TrainConfig train_config(const RunConfig& c) {
  TrainConfig tc;
  tc.learning_rate = c.lr;
  tc.epochs = c.epochs;
  tc.batch_size = c.batch;
  tc.dropout = c.dropout;
  tc.gamma = c.effective_gamma();
  tc.seed = c.seed;
  tc.patience = c.patience;
  tc.regularize_with_dropout = c.regularize_with_dropout;
  tc.train_embeddings = c.train_embeddings;
  return tc;
}

std::string bootstrap_block(const BootstrapResult& b) {
  return fmt::format("[bootstrap]\nresamples = {}\np_accuracy = {:.6f}\np_macro_f1 = {:.6f}\n",
                     b.resamples, b.p_accuracy, b.p_macro_f1);
}

}  // namespace

StageError::StageError(const std::string& stage, const std::string& cause)
    : Error(fmt::format("{}: {}", stage, cause)), stage_(stage) {}

CorpusFormat parse_corpus_format(std::string_view text) {
  if (text == "semeval-xml") return CorpusFormat::SemevalXml;
  if (text == "twitter-3line") return CorpusFormat::Twitter3Line;
  throw ConfigError(fmt::format("unknown format '{}' (semeval-xml or twitter-3line)", text));
}

std::vector<TextInstance> load_raw(const fs::path& path, CorpusFormat format) {
  return format == CorpusFormat::SemevalXml ? load_semeval_xml(path) : load_twitter_3line(path);
}

std::string format_counts(const ClassCounts& c) {
  return fmt::format("Pos {} Neg {} Neu {}", c.positive, c.negative, c.neutral);
}

PrepareSummary cmd_prepare(const PrepareOptions& o, std::ostream& log) {
  if (o.min_count < 1) throw ConfigError("min_count must be >= 1");
  if (!(o.val_fraction > 0.0 && o.val_fraction < 1.0)) {
    throw ConfigError("val_fraction must be in (0, 1)");
  }
  auto train = stage("load", [&] { return load_raw(o.train, o.format); });
  std::vector<TextInstance> test;
  if (!o.test.empty()) test = stage("load", [&] { return load_raw(o.test, o.format); });

  PrepareSummary summary;
  summary.train = count_labels(train);
  if (!o.test.empty()) summary.test = count_labels(test);

  return stage("write", [&] {
    std::vector<TextInstance> all = train;
    all.insert(all.end(), test.begin(), test.end());
    const auto vocab = build_vocab(all, o.min_count);
    summary.vocab_size = vocab.size();

    Rng rng = Rng(o.seed).split(kSplitStream);
    const auto split = split_heldout(train, o.val_fraction, rng);
    summary.validation_size = split.validation.size();

    fs::create_directories(o.out);
    save_corpus(o.out / "train.jsonl", train);
    save_corpus(o.out / "test.jsonl", test);
    vocab.save(o.out / "vocab.txt");

    json sj;
    sj["seed"] = o.seed;
    sj["fraction"] = o.val_fraction;
    std::vector<std::string> ids;
    for (const auto& t : split.validation) ids.push_back(t.id);
    sj["validation"] = ids;
    write_text(o.out / "split.json", sj.dump(1) + "\n");

    json mj;
    mj["format"] = o.format == CorpusFormat::SemevalXml ? "semeval-xml" : "twitter-3line";
    mj["train_source"] = o.train.filename().string();
    mj["test_source"] = o.test.empty() ? "" : o.test.filename().string();
    mj["train_counts"] = counts_json(summary.train);
    if (summary.test) mj["test_counts"] = counts_json(*summary.test);
    mj["min_count"] = o.min_count;
    mj["vocab_size"] = vocab.size();
    mj["vocab_hash"] = hex64(vocab.hash());
    mj["train_hash"] = hex64(fnv1a64(read_file(o.out / "train.jsonl")));
    write_text(o.out / "manifest.json", mj.dump(1) + "\n");

    log << "train: " << format_counts(summary.train) << '\n';
    if (summary.test) log << "test: " << format_counts(*summary.test) << '\n';
    log << fmt::format("vocabulary: {} entries; validation: {} of {}\n", vocab.size(),
                       summary.validation_size, train.size());
    return summary;
  });
}

SyntheticConfig synthetic_config(const RunConfig& c) {
  SyntheticConfig sc;
  sc.seed = c.synthetic_seed;
  sc.train_size = c.synthetic_train;
  sc.test_size = c.synthetic_test;
  sc.dim = c.dim;
  return sc;
}

RunData load_run_data(const RunConfig& c) { return load_run_data(c, synthetic_config(c)); }

RunData load_run_data(const RunConfig& c, const SyntheticConfig& sc) {
  RunData d;
  if (c.dataset == "synthetic") {
    auto corpus = make_synthetic(sc);
    d.name = "synthetic";
    std::vector<TextInstance> all = corpus.train;
    all.insert(all.end(), corpus.test.begin(), corpus.test.end());
    d.vocab = build_vocab(all, 1);
    Rng split_rng = Rng(c.synthetic_seed).split(kSplitStream);
    auto split = split_heldout(corpus.train, c.val_fraction, split_rng);
    d.train = std::move(split.train);
    d.validation = std::move(split.validation);
    d.test = std::move(corpus.test);
    if (c.embeddings.empty()) {
      Rng rng = Rng(c.seed).split(kEmbeddingStream);
      d.embeddings = embedding_matrix(d.vocab, c.dim, corpus.vectors, rng);
    }
  } else {
    const fs::path dir = c.dataset;
    if (!fs::is_directory(dir)) {
      throw Error(fmt::format("{} is not a prepared corpus directory (run 'prepare' first)",
                              dir.string()));
    }
    d.name = dir.filename().empty() ? dir.parent_path().filename().string()
                                    : dir.filename().string();
    d.vocab = Vocabulary::load(dir / "vocab.txt");
    auto train = load_corpus(dir / "train.jsonl");
    d.test = load_corpus(dir / "test.jsonl");
    const auto sj = json::parse(read_file(dir / "split.json"));
    const auto ids = sj.at("validation").get<std::vector<std::string>>();
    const std::set<std::string> held(ids.begin(), ids.end());
    for (auto& t : train) (held.count(t.id) ? d.validation : d.train).push_back(std::move(t));
    if (d.test.empty()) throw Error(fmt::format("{}: empty test corpus", dir.string()));
  }
  if (!c.embeddings.empty()) {
    Rng rng = Rng(c.seed).split(kEmbeddingStream);
    d.embeddings = load_embeddings(c.embeddings, d.vocab, c.dim, rng);
  }
  return d;
}

RunSummary cmd_run(const RunConfig& config, std::ostream& log) {
  validate(config);
  return run_pipeline(config, stage("load", [&] { return load_run_data(config); }), log);
}

RunSummary run_pipeline(const RunConfig& config, RunData data, std::ostream& log) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  RunSummary summary;
  summary.out = output_directory(config);
  const fs::path out = summary.out;

  data.train = drop_contextless(std::move(data.train), log, "train");
  data.validation = drop_contextless(std::move(data.validation), log, "validation");
  data.test = drop_contextless(std::move(data.test), log, "test");
  const auto train = encode_all(data.train, data.vocab);
  const auto validation = encode_all(data.validation, data.vocab);
  const auto test = encode_all(data.test, data.vocab);

  stage("write", [&] {
    fs::create_directories(out);
    for (const char* stale : {"mining_log.jsonl", "supervision.jsonl", "enhanced.ckpt",
                              "history_enhanced.tsv"}) {
      fs::remove(out / stale);
    }
    write_text(out / "config.txt", config_snapshot(config));
    save_corpus(out / "train.jsonl", data.train);
    data.vocab.save(out / "vocab.txt");
    return 0;
  });
  log << fmt::format("{}: {} train / {} validation / {} test, |V| = {}\n", data.name,
                     train.size(), validation.size(), test.size(), data.vocab.size());

  const ModelParams initial = [&] {
    Rng rng = Rng(config.seed).split(kInitStream);
    return data.embeddings.values().empty() ? init_params(data.vocab.size(), config.dim, rng)
                                            : init_params(data.embeddings, rng);
  }();
  const TrainConfig tc = train_config(config);

  const auto baseline = stage("baseline", [&] { return pssa::train(initial, train, tc, validation); });
  stage("write", [&] {
    save_checkpoint(out / "baseline.ckpt", baseline.params, data.vocab);
    write_history(out / "history_baseline.tsv", baseline.history);
    return 0;
  });
  summary.baseline = predict_all(baseline.params, test);
  log << fmt::format("baseline: best epoch {}, test accuracy {:.4f} ({:.1f}s)\n",
                     baseline.best_epoch, accuracy(summary.baseline), elapsed());

  std::string metrics = format_metrics("baseline", summary.baseline);

  if (config.mode != RunMode::Baseline) {
    MiningConfig mc;
    mc.iterations = config.k;
    mc.entropy_threshold = config.effective_epsilon();
    mc.saliency = config.effective_saliency();
    mc.noise = {config.noise_n, config.noise_sigma};
    mc.epochs_per_iteration = config.mine_epochs;
    mc.random_mask = config.mode == RunMode::RandomMask;
    mc.seed = Rng(config.seed).split(kMiningStream).next_u64();
    mc.train = tc;

    auto mined = stage("mining", [&] { return run_mining(train, baseline.params, mc); });
    std::vector<MinedInstance> supervised =
        config.mode == RunMode::ActiveOnly       ? restrict_supervision(mined.corpus, true, false)
        : config.mode == RunMode::MisleadingOnly ? restrict_supervision(mined.corpus, false, true)
                                                 : mined.corpus;
    std::size_t n_active = 0, n_misleading = 0;
    for (const auto& m : supervised) {
      n_active += m.sets.active.size();
      n_misleading += m.sets.misleading.size();
    }
    stage("write", [&] {
      const auto hash = hex64(fnv1a64(read_file(out / "train.jsonl")));
      write_mining_log(out / "mining_log.jsonl", mined.log, hash, data.vocab, train);
      save_supervision(out / "supervision.jsonl", to_supervision_state(supervised));
      return 0;
    });
    log << fmt::format("mining: {} active, {} misleading words over {} instances ({:.1f}s)\n",
                       n_active, n_misleading, train.size(), elapsed());

    const ModelParams& start_params = config.warm_start ? mined.final_params : initial;
    const auto enhanced = stage("supervised", [&] {
      return train_supervised(start_params, supervised, tc, validation);
    });
    stage("write", [&] {
      save_checkpoint(out / "enhanced.ckpt", enhanced.params, data.vocab);
      write_history(out / "history_enhanced.tsv", enhanced.history);
      return 0;
    });
    summary.enhanced = predict_all(enhanced.params, test);
    Rng brng = Rng(config.seed).split(kBootstrapStream);
    summary.bootstrap = stage("evaluate", [&] {
      return bootstrap_test(*summary.enhanced, summary.baseline, config.bootstrap_n, brng);
    });
    log << fmt::format("enhanced: best epoch {}, test accuracy {:.4f} ({:.1f}s)\n",
                       enhanced.best_epoch, accuracy(*summary.enhanced), elapsed());

    metrics += format_metrics("enhanced", *summary.enhanced);
    metrics += bootstrap_block(*summary.bootstrap);
    metrics += fmt::format("[mining]\nsaliency = {}\ninstances = {}\nactive = {}\nmisleading = {}\n",
                           to_string(mc.saliency), train.size(), n_active, n_misleading);
    summary.mining = std::move(mined);
  }

  stage("write", [&] {
    write_text(out / "metrics.txt", metrics);
    std::string preds = summary.enhanced ? "id\tgold\tbaseline\tenhanced\n" : "id\tgold\tbaseline\n";
    for (std::size_t i = 0; i < summary.baseline.size(); ++i) {
      preds += fmt::format("{}\t{}\t{}", summary.baseline.ids[i],
                           to_string(summary.baseline.gold[i]),
                           to_string(summary.baseline.predicted[i]));
      if (summary.enhanced) preds += fmt::format("\t{}", to_string(summary.enhanced->predicted[i]));
      preds += '\n';
    }
    write_text(out / "predictions.tsv", preds);
    return 0;
  });
  return summary;
}

PredictionSet cmd_evaluate(const fs::path& checkpoint, const fs::path& corpus,
                           const fs::path& vocab_path, std::ostream& out) {
  const auto vocab = stage("load", [&] { return Vocabulary::load(vocab_path); });
  const auto params = stage("load", [&] { return load_checkpoint(checkpoint, vocab); });
  const auto texts = stage("load", [&] { return load_corpus(corpus); });
  const auto instances = encode_all(texts, vocab);
  auto preds = stage("evaluate", [&] { return predict_all(params, instances); });
  out << format_metrics("evaluate", preds);
  return preds;
}

}  // namespace pssa
