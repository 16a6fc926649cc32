#pragma once

// End-to-end stages behind the command-line tool.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pssa/config.hpp"
#include "pssa/eval.hpp"
#include "pssa/mining.hpp"
#include "pssa/synthetic.hpp"

namespace pssa {

/// A stage failure; the message starts with the stage name.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& cause);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

enum class CorpusFormat { SemevalXml, Twitter3Line };
CorpusFormat parse_corpus_format(std::string_view text);  // throws ConfigError
std::vector<TextInstance> load_raw(const std::filesystem::path& path, CorpusFormat format);

struct PrepareOptions {
  CorpusFormat format = CorpusFormat::SemevalXml;
  std::filesystem::path train;
  std::filesystem::path test;  // optional
  std::filesystem::path out;
  std::size_t min_count = 1;
  double val_fraction = 0.2;
  std::uint64_t seed = 1;
};

struct PrepareSummary {
  ClassCounts train;
  std::optional<ClassCounts> test;
  std::size_t vocab_size = 0;
  std::size_t validation_size = 0;
};

/// "Pos 980 Neg 858 Neu 454"
std::string format_counts(const ClassCounts& counts);

/// Writes train.jsonl, test.jsonl, vocab.txt, split.json and manifest.json.
PrepareSummary cmd_prepare(const PrepareOptions& options, std::ostream& log);

/// Train / validation / test instances and vocabulary of one run.
struct RunData {
  std::string name;
  std::vector<TextInstance> train;
  std::vector<TextInstance> validation;
  std::vector<TextInstance> test;
  Vocabulary vocab;
  Tensor embeddings;  // |V| x dim, or empty for random initialization
};

/// Loads a prepared directory or generates the synthetic corpus.
RunData load_run_data(const RunConfig& config);
/// Same, with explicit generator settings for the synthetic corpus.
RunData load_run_data(const RunConfig& config, const SyntheticConfig& synthetic);
SyntheticConfig synthetic_config(const RunConfig& config);

struct RunSummary {
  std::filesystem::path out;
  PredictionSet baseline;
  std::optional<PredictionSet> enhanced;
  std::optional<BootstrapResult> bootstrap;
  std::optional<MiningResult> mining;
};

/// Baseline training, mining (unless mode is baseline), supervised training
/// and evaluation. Writes every artifact into output_directory(config).
RunSummary cmd_run(const RunConfig& config, std::ostream& log);

/// cmd_run on already loaded data.
RunSummary run_pipeline(const RunConfig& config, RunData data, std::ostream& log);

/// Scores a checkpoint on a normalized corpus file.
PredictionSet cmd_evaluate(const std::filesystem::path& checkpoint,
                           const std::filesystem::path& corpus,
                           const std::filesystem::path& vocab, std::ostream& out);

}  // namespace pssa
