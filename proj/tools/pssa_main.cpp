#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pssa/config.hpp"
#include "pssa/pipeline.hpp"
#include "pssa/report.hpp"

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

struct RunFlags {
  std::string config_file;
  std::map<std::string, std::string> values;  // config key -> flag text
};

void add_run_flags(CLI::App& cmd, RunFlags& flags) {
  cmd.add_option("--config", flags.config_file, "Flat key=value config file");
  for (const auto& key : pssa::config_keys()) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    cmd.add_option("--" + flag, flags.values[key], "Overrides '" + key + "'");
  }
}

pssa::RunConfig resolve(const CLI::App& cmd, const RunFlags& flags) {
  pssa::RunConfig config;
  if (!flags.config_file.empty()) pssa::apply_config_file(config, flags.config_file);
  for (const auto& [key, value] : flags.values) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (cmd.count("--" + flag) > 0) pssa::set_config_value(config, key, value);
  }
  pssa::validate(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attention-supervision mining for aspect-level sentiment classification"};
  app.require_subcommand(1);

  auto* prepare = app.add_subcommand("prepare", "Normalize a raw corpus and build the vocabulary");
  pssa::PrepareOptions prep;
  std::string format;
  std::string prep_train, prep_test, prep_out;
  prepare->add_option("--format", format, "semeval-xml | twitter-3line")->required();
  prepare->add_option("--train", prep_train, "Raw training file")->required();
  prepare->add_option("--test", prep_test, "Raw test file");
  prepare->add_option("--out", prep_out, "Output directory")->required();
  prepare->add_option("--min-count", prep.min_count, "Minimum token frequency");
  prepare->add_option("--val-fraction", prep.val_fraction, "Held-out fraction of train");
  prepare->add_option("--seed", prep.seed, "Split seed");

  auto* run = app.add_subcommand("run", "Baseline, mining, supervised training and evaluation");
  RunFlags run_flags;
  add_run_flags(*run, run_flags);

  auto* report = app.add_subcommand("report", "Render attention heatmaps from a mining log");
  pssa::ReportOptions rep;
  std::string rep_run, rep_log, rep_corpus, rep_vocab, rep_ckpt, rep_out;
  report->add_option("--run", rep_run, "Run directory (supplies defaults for the rest)");
  report->add_option("--log", rep_log, "Mining log");
  report->add_option("--corpus", rep_corpus, "Normalized corpus the log was mined on");
  report->add_option("--vocab", rep_vocab, "Vocabulary file");
  report->add_option("--checkpoint", rep_ckpt, "Checkpoint for a final attention row");
  report->add_option("--out", rep_out, "Output directory");
  report->add_option("--id", rep.ids, "Instance id to include (repeatable)");
  report->add_option("--limit", rep.limit, "Maximum number of instances");

  auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on a normalized corpus");
  std::string ev_ckpt, ev_corpus, ev_vocab;
  evaluate->add_option("--checkpoint", ev_ckpt, "Checkpoint")->required();
  evaluate->add_option("--corpus", ev_corpus, "Normalized corpus (jsonl)")->required();
  evaluate->add_option("--vocab", ev_vocab, "Vocabulary file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (prepare->parsed()) {
      prep.format = pssa::parse_corpus_format(format);
      prep.train = prep_train;
      prep.test = prep_test;
      prep.out = prep_out;
      pssa::cmd_prepare(prep, std::cout);
    } else if (run->parsed()) {
      const auto config = resolve(*run, run_flags);
      const auto summary = pssa::cmd_run(config, std::cerr);
      std::cout << fmt::format("baseline accuracy {:.4f} macro-F1 {:.4f}\n",
                               pssa::accuracy(summary.baseline), pssa::macro_f1(summary.baseline));
      if (summary.enhanced) {
        std::cout << fmt::format("enhanced accuracy {:.4f} macro-F1 {:.4f} (p = {:.3f})\n",
                                 pssa::accuracy(*summary.enhanced),
                                 pssa::macro_f1(*summary.enhanced), summary.bootstrap->p_accuracy);
      }
      std::cout << "artifacts in " << summary.out.string() << '\n';
    } else if (report->parsed()) {
      const std::filesystem::path dir = rep_run;
      auto pick = [&](const std::string& given, const char* name) {
        if (!given.empty()) return std::filesystem::path(given);
        if (rep_run.empty()) throw pssa::ConfigError(fmt::format("--{} or --run is required", name));
        return std::filesystem::path();
      };
      rep.log = pick(rep_log, "log");
      rep.corpus = pick(rep_corpus, "corpus");
      rep.vocab = pick(rep_vocab, "vocab");
      if (rep.log.empty()) rep.log = dir / "mining_log.jsonl";
      if (rep.corpus.empty()) rep.corpus = dir / "train.jsonl";
      if (rep.vocab.empty()) rep.vocab = dir / "vocab.txt";
      rep.checkpoint = rep_ckpt;
      if (rep.checkpoint.empty() && !rep_run.empty() &&
          std::filesystem::exists(dir / "enhanced.ckpt")) {
        rep.checkpoint = dir / "enhanced.ckpt";
      }
      rep.out = !rep_out.empty() ? std::filesystem::path(rep_out)
                : !rep_run.empty() ? dir / "report"
                                   : std::filesystem::path("report");
      pssa::cmd_report(rep, std::cout);
    } else if (evaluate->parsed()) {
      pssa::cmd_evaluate(ev_ckpt, ev_corpus, ev_vocab, std::cout);
    }
  } catch (const pssa::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return 0;
}
