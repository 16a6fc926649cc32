#include "pssa/report.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <fstream>

#include <fmt/format.h>

namespace pssa {
namespace {

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<char> aspect_flags(const TextInstance& t) {
  std::vector<char> flags(t.tokens.size(), 0);
  for (auto p : t.aspect) flags[p] = 1;
  return flags;
}

}  // namespace

std::vector<InstanceReport> build_report(const MiningLog& log,
                                         std::span<const TextInstance> corpus,
                                         const Vocabulary& vocab, const ModelParams* params,
                                         std::span<const std::string> ids, std::size_t limit) {
  std::map<std::string, const TextInstance*> by_id;
  for (const auto& t : corpus) by_id.emplace(t.id, &t);

  std::vector<std::string> order;
  std::map<std::string, std::vector<const MiningLogEntry*>> entries;
  for (const auto& e : log.entries) {
    if (!by_id.count(e.id)) throw Error(fmt::format("mining log references unknown id {}", e.id));
    auto& list = entries[e.id];
    if (list.empty()) order.push_back(e.id);
    list.push_back(&e);
  }
  if (!ids.empty()) {
    order.assign(ids.begin(), ids.end());
    for (const auto& id : order) {
      if (!by_id.count(id)) throw Error(fmt::format("unknown instance id {}", id));
    }
  }
  if (order.size() > limit) order.resize(limit);

  std::vector<InstanceReport> out;
  for (const auto& id : order) {
    const TextInstance& text = *by_id.at(id);
    InstanceReport rep{id, {}};
    const auto aspect = aspect_flags(text);
    for (const auto* e : entries[id]) {
      if (e->saliency.size() != text.tokens.size()) {
        throw Error(fmt::format("mining log record for {} has {} weights for {} tokens", id,
                                e->saliency.size(), text.tokens.size()));
      }
      ReportRow row;
      row.label = fmt::format("Iter {}", e->iteration);
      row.tokens = text.tokens;
      row.weights = e->saliency;
      row.aspect = aspect;
      for (auto p : e->masked) {
        row.tokens.at(p) = std::string(Vocabulary::kMaskToken);
        row.weights.at(p) = 0.0;
      }
      if (e->status != StepStatus::Exhausted) row.entropy = e->entropy;
      row.gold = e->gold;
      row.predicted = e->predicted;
      row.extracted = e->position ? text.tokens.at(*e->position) : "---";
      rep.rows.push_back(std::move(row));
    }
    if (params) {
      const auto inst = encode(text, vocab);
      const auto trace = forward(*params, inst, {});
      ReportRow row;
      row.label = "Final";
      row.tokens = text.tokens;
      row.weights = trace.alpha;
      row.aspect = aspect;
      row.gold = text.label;
      row.predicted = trace.predicted;
      row.extracted = "---";
      rep.rows.push_back(std::move(row));
    }
    out.push_back(std::move(rep));
  }
  return out;
}

std::string render_text(std::span<const InstanceReport> reports) {
  std::string out;
  for (const auto& rep : reports) {
    out += fmt::format("== {}\n", rep.id);
    if (rep.rows.empty()) out += "(no mining records)\n";
    for (const auto& row : rep.rows) {
      std::string sentence;
      for (std::size_t i = 0; i < row.tokens.size(); ++i) {
        if (i) sentence += ' ';
        if (row.aspect[i]) {
          sentence += fmt::format("[{}]", row.tokens[i]);
        } else if (row.weights[i] > 0.0) {
          sentence += fmt::format("{}({:.2f})", row.tokens[i], row.weights[i]);
        } else {
          sentence += row.tokens[i];
        }
      }
      out += fmt::format("{:<7} | {} | E={} | y={} | y_p={} | {}\n", row.label, sentence,
                         row.entropy ? fmt::format("{:.2f}", *row.entropy) : "---",
                         row.gold ? to_string(*row.gold) : "---",
                         row.predicted ? to_string(*row.predicted) : "---", row.extracted);
    }
  }
  return out;
}

std::string render_html(std::span<const InstanceReport> reports) {
  std::string out =
      "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Attention report</title>\n"
      "<style>\n"
      "body{font-family:sans-serif;margin:1.5em}\n"
      "table{border-collapse:collapse;margin-bottom:1.5em}\n"
      "td,th{border:1px solid #bbb;padding:3px 6px;vertical-align:top}\n"
      "th{background:#eee}\n"
      ".tok{padding:0 2px;margin:0 1px;border-radius:2px}\n"
      ".aspect{font-weight:bold;text-decoration:underline}\n"
      ".mask{color:#888}\n"
      "</style></head><body>\n";
  for (const auto& rep : reports) {
    out += fmt::format("<h3>{}</h3>\n<table>\n<tr><th></th><th>Sentence</th><th>E</th>"
                       "<th>y</th><th>y_p</th><th>x'_m</th></tr>\n",
                       html_escape(rep.id));
    for (const auto& row : rep.rows) {
      std::string sentence;
      for (std::size_t i = 0; i < row.tokens.size(); ++i) {
        const bool masked = row.tokens[i] == Vocabulary::kMaskToken;
        std::string cls = "tok";
        if (row.aspect[i]) cls += " aspect";
        if (masked) cls += " mask";
        const double shade = std::clamp(row.weights[i], 0.0, 1.0);
        sentence += fmt::format("<span class=\"{}\" style=\"background:rgba(220,40,40,{:.3f})\" "
                                "title=\"{:.4f}\">{}</span>",
                                cls, shade, row.weights[i], html_escape(row.tokens[i]));
      }
      out += fmt::format("<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td>"
                         "<td>{}</td></tr>\n",
                         row.label, sentence,
                         row.entropy ? fmt::format("{:.2f}", *row.entropy) : "---",
                         row.gold ? to_string(*row.gold) : "---",
                         row.predicted ? to_string(*row.predicted) : "---",
                         html_escape(row.extracted));
    }
    out += "</table>\n";
  }
  out += "</body></html>\n";
  return out;
}

void cmd_report(const ReportOptions& o, std::ostream& log) {
  const auto mining_log = read_mining_log(o.log);
  const auto corpus_bytes = read_file(o.corpus);
  const auto corpus_hash = hex64(fnv1a64(corpus_bytes));
  if (corpus_hash != mining_log.corpus_hash) {
    throw Error(fmt::format("corpus hash mismatch: log was written for {}, {} hashes to {}",
                            mining_log.corpus_hash, o.corpus.string(), corpus_hash));
  }
  const auto corpus = load_corpus(o.corpus);
  const auto vocab = Vocabulary::load(o.vocab);
  std::optional<ModelParams> params;
  if (!o.checkpoint.empty()) params = load_checkpoint(o.checkpoint, vocab);

  const auto reports =
      build_report(mining_log, corpus, vocab, params ? &*params : nullptr, o.ids, o.limit);
  std::filesystem::create_directories(o.out);
  for (auto [name, text] : {std::pair{"report.txt", render_text(reports)},
                            std::pair{"report.html", render_html(reports)}}) {
    std::ofstream f(o.out / name, std::ios::binary);
    if (!f) throw Error(fmt::format("cannot write {}", (o.out / name).string()));
    f << text;
  }
  log << fmt::format("wrote {} instance(s) to {}\n", reports.size(), o.out.string());
}

}  // namespace pssa
