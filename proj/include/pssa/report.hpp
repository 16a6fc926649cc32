#pragma once

// Attention heatmaps of the mining log: one row per mining iteration with
// the shaded sentence, its entropy, gold and predicted labels, and the word
// extracted at that iteration.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pssa/mining.hpp"

namespace pssa {

struct ReportRow {
  std::string label;                  // "Iter 1", ..., or "Final"
  std::vector<std::string> tokens;    // masked tokens rendered as <mask>
  std::vector<double> weights;        // shade per token, 0 on masked/aspect
  std::vector<char> aspect;
  std::optional<double> entropy;
  std::optional<Sentiment> gold, predicted;
  std::string extracted;              // "---" when nothing was extracted
};

struct InstanceReport {
  std::string id;
  std::vector<ReportRow> rows;
};

/// Builds rows for the given ids (all logged ids, in first-seen order, when
/// `ids` is empty) up to `limit` instances. With `params`, appends a
/// "Final" row holding that model's attention on the unmasked sentence.
std::vector<InstanceReport> build_report(const MiningLog& log,
                                         std::span<const TextInstance> corpus,
                                         const Vocabulary& vocab, const ModelParams* params,
                                         std::span<const std::string> ids, std::size_t limit);

std::string render_text(std::span<const InstanceReport> reports);
/// Single self-contained HTML page (inline CSS, no scripts or external links).
std::string render_html(std::span<const InstanceReport> reports);

struct ReportOptions {
  std::filesystem::path log;
  std::filesystem::path corpus;
  std::filesystem::path vocab;
  std::filesystem::path checkpoint;  // optional
  std::filesystem::path out;         // directory for report.txt / report.html
  std::vector<std::string> ids;
  std::size_t limit = 50;
};

/// Throws Error when the log was written for a different corpus or the
/// checkpoint for a different vocabulary.
void cmd_report(const ReportOptions& options, std::ostream& log);

}  // namespace pssa
