#include "pssa/mining.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

namespace pssa {

using json = nlohmann::json;

std::string_view to_string(Destination d) {
  switch (d) {
    case Destination::Active: return "s_a";
    case Destination::Misleading: return "s_m";
    case Destination::None: break;
  }
  return "---";
}

std::string_view to_string(StepStatus s) {
  switch (s) {
    case StepStatus::Extracted: return "extracted";
    case StepStatus::Gated: return "gated";
    case StepStatus::Exhausted: return "exhausted";
  }
  return "?";
}

StepDecision mine_instance_step(const ModelParams& params, const Instance& instance,
                                SupervisionSets& sets, const MiningConfig& config, Rng& rng) {
  StepDecision out;
  out.masked_positions = sets.all();
  out.masked = apply_mask(instance, out.masked_positions);
  const auto eligible = eligible_positions(out.masked, out.masked_positions);
  const auto count = static_cast<std::size_t>(std::count(eligible.begin(), eligible.end(), char{1}));

  if (count < 2) {
    // A one-point distribution has entropy 0 and would pass any gate.
    out.status = StepStatus::Exhausted;
    out.saliency.mode = config.saliency;
    out.saliency.scores.assign(eligible.begin(), eligible.end());
    if (count == 1) {
      out.predicted = forward(params, out.masked, out.masked_positions).predicted;
    } else {
      out.predicted = instance.label;  // nothing left to predict from
    }
    return out;
  }

  const auto trace = forward(params, out.masked, out.masked_positions);
  out.predicted = trace.predicted;
  out.saliency = config.saliency == SaliencyMode::AttentionWeight
                     ? saliency_aw(trace)
                     : saliency_pg(params, out.masked, out.masked_positions, config.noise, rng);
  out.entropy = entropy(out.saliency.scores);
  if (!(out.entropy < config.entropy_threshold)) {
    out.status = StepStatus::Gated;
    return out;
  }

  std::size_t pick;
  if (config.random_mask) {
    std::size_t nth = rng.below(count);
    pick = 0;
    for (std::size_t i = 0; i < eligible.size(); ++i) {
      if (eligible[i] && nth-- == 0) {
        pick = i;
        break;
      }
    }
  } else {
    pick = argmax(out.saliency.scores);
  }
  out.status = StepStatus::Extracted;
  out.position = pick;
  if (out.predicted == instance.label) {
    out.destination = Destination::Active;
    sets.active.push_back(pick);
  } else {
    out.destination = Destination::Misleading;
    sets.misleading.push_back(pick);
  }
  return out;
}

MiningResult run_mining(std::span<const Instance> corpus, ModelParams initial,
                        const MiningConfig& config) {
  if (config.iterations < 1) throw std::invalid_argument("run_mining: K must be >= 1");
  if (!(config.entropy_threshold >= 0.0)) {
    throw std::invalid_argument("run_mining: entropy threshold must be non-negative");
  }
  MiningResult result;
  ModelParams theta = std::move(initial);
  if (config.keep_history) result.history.push_back(theta);

  std::vector<SupervisionSets> sets(corpus.size());
  const Rng root(config.seed);

  for (int k = 1; k <= config.iterations; ++k) {
    std::vector<TrainExample> masked_corpus;
    masked_corpus.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      Rng rng = root.split((static_cast<std::uint64_t>(k) << 32) | i);
      StepDecision d;
      try {
        d = mine_instance_step(theta, corpus[i], sets[i], config, rng);
      } catch (const NumericalError& e) {
        throw NumericalError(fmt::format("{} (mining iteration {})", e.what(), k));
      }
      MiningLogEntry entry;
      entry.iteration = k;
      entry.id = corpus[i].id;
      entry.entropy = d.entropy;
      entry.gold = corpus[i].label;
      entry.predicted = d.predicted;
      entry.status = d.status;
      entry.position = d.position;
      entry.destination = d.destination;
      entry.masked = d.masked_positions;
      entry.saliency = std::move(d.saliency.scores);
      result.log.push_back(std::move(entry));

      const auto eligible = eligible_positions(d.masked, d.masked_positions);
      if (std::find(eligible.begin(), eligible.end(), char{1}) != eligible.end()) {
        masked_corpus.push_back({std::move(d.masked), std::move(d.masked_positions), {}});
      }
    }

    if (config.epochs_per_iteration > 0 && !masked_corpus.empty()) {
      TrainConfig tc = config.train;
      tc.epochs = config.epochs_per_iteration;
      tc.patience = 0;
      tc.seed = mix_seed(config.train.seed, static_cast<std::uint64_t>(k));
      try {
        theta = train_examples(std::move(theta), masked_corpus, tc).params;
      } catch (const NumericalError& e) {
        throw NumericalError(fmt::format("{} (mining iteration {})", e.what(), k));
      }
    }
    if (config.keep_history) result.history.push_back(theta);
  }

  result.corpus.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    result.corpus.push_back({corpus[i], sets[i], expected_distribution(sets[i])});
  }
  result.final_params = std::move(theta);
  return result;
}

MiningResult mine_random_ablation(std::span<const Instance> corpus, ModelParams initial,
                                  MiningConfig config) {
  config.random_mask = true;
  return run_mining(corpus, std::move(initial), config);
}

std::vector<MinedInstance> restrict_supervision(std::span<const MinedInstance> corpus,
                                                bool keep_active, bool keep_misleading) {
  std::vector<MinedInstance> out;
  out.reserve(corpus.size());
  for (const auto& m : corpus) {
    MinedInstance r{m.instance, {}, {}};
    if (keep_active) r.sets.active = m.sets.active;
    if (keep_misleading) r.sets.misleading = m.sets.misleading;
    r.expected = expected_distribution(r.sets);
    out.push_back(std::move(r));
  }
  return out;
}

SupervisionState to_supervision_state(std::span<const MinedInstance> corpus) {
  SupervisionState state;
  for (const auto& m : corpus) state[m.instance.id] = m.sets;
  return state;
}

void write_mining_log(const std::filesystem::path& path, std::span<const MiningLogEntry> log,
                      const std::string& corpus_hash, const Vocabulary& vocab,
                      std::span<const Instance> corpus) {
  std::unordered_map<std::string, const Instance*> by_id;
  for (const auto& inst : corpus) by_id.emplace(inst.id, &inst);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  json header;
  header["format"] = "pssa-mining-log";
  header["corpus_hash"] = corpus_hash;
  header["records"] = log.size();
  out << header.dump() << '\n';
  for (const auto& e : log) {
    json j;
    j["k"] = e.iteration;
    j["id"] = e.id;
    j["E"] = e.entropy;
    j["y"] = std::string(to_string(e.gold));
    j["y_p"] = std::string(to_string(e.predicted));
    j["status"] = std::string(to_string(e.status));
    if (e.position) {
      j["position"] = *e.position;
      auto it = by_id.find(e.id);
      j["word"] = it == by_id.end() ? std::string("?")
                                    : vocab.word(it->second->tokens[*e.position]);
    } else {
      j["position"] = "---";
      j["word"] = "---";
    }
    j["set"] = std::string(to_string(e.destination));
    j["masked"] = e.masked;
    j["saliency"] = e.saliency;
    out << j.dump() << '\n';
  }
}

MiningLog read_mining_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path.string()));
  MiningLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      if (line_no == 1) {
        if (j.value("format", "") != "pssa-mining-log") throw Error("missing mining-log header");
        log.corpus_hash = j.at("corpus_hash").get<std::string>();
        continue;
      }
      MiningLogEntry e;
      e.iteration = j.at("k").get<int>();
      e.id = j.at("id").get<std::string>();
      e.entropy = j.at("E").get<double>();
      e.gold = parse_sentiment(j.at("y").get<std::string>());
      e.predicted = parse_sentiment(j.at("y_p").get<std::string>());
      const auto status = j.at("status").get<std::string>();
      e.status = status == "extracted" ? StepStatus::Extracted
                 : status == "gated"   ? StepStatus::Gated
                                       : StepStatus::Exhausted;
      if (j.at("position").is_number()) e.position = j.at("position").get<std::size_t>();
      const auto set = j.at("set").get<std::string>();
      e.destination = set == "s_a" ? Destination::Active
                      : set == "s_m" ? Destination::Misleading
                                     : Destination::None;
      e.masked = j.at("masked").get<std::vector<std::size_t>>();
      e.saliency = j.at("saliency").get<std::vector<double>>();
      log.entries.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw Error(fmt::format("{}: line {}: {}", path.string(), line_no, ex.what()));
    }
  }
  if (line_no == 0) throw Error(fmt::format("{}: empty mining log", path.string()));
  return log;
}

}  // namespace pssa
