#include "pssa/eval.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace pssa {

void PredictionSet::push_back(std::string id, Sentiment g, Sentiment p) {
  ids.push_back(std::move(id));
  gold.push_back(g);
  predicted.push_back(p);
}

void validate(const PredictionSet& preds) {
  if (preds.ids.size() != preds.gold.size() || preds.ids.size() != preds.predicted.size()) {
    throw Error("prediction set: sequences differ in length");
  }
  if (preds.ids.empty()) throw Error("prediction set is empty");
  std::set<std::string> seen(preds.ids.begin(), preds.ids.end());
  if (seen.size() != preds.ids.size()) throw Error("prediction set: duplicate ids");
}

namespace {

using Confusion = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;

double accuracy_of(const Confusion& cm) {
  std::size_t correct = 0, total = 0;
  for (std::size_t g = 0; g < kNumClasses; ++g) {
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      total += cm[g][p];
      if (g == p) correct += cm[g][p];
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::array<ClassScores, kNumClasses> scores_of(const Confusion& cm) {
  std::array<ClassScores, kNumClasses> out;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::size_t predicted = 0, gold = 0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      predicted += cm[k][c];
      gold += cm[c][k];
    }
    const double tp = static_cast<double>(cm[c][c]);
    auto& s = out[c];
    s.support = gold;
    s.precision = predicted == 0 ? 0.0 : tp / static_cast<double>(predicted);
    s.recall = gold == 0 ? 0.0 : tp / static_cast<double>(gold);
    s.f1 = s.precision + s.recall == 0.0 ? 0.0
                                          : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return out;
}

double macro_of(const Confusion& cm) {
  const auto s = scores_of(cm);
  return (s[0].f1 + s[1].f1 + s[2].f1) / 3.0;
}

Confusion confusion(const PredictionSet& preds) {
  Confusion cm{};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    ++cm[static_cast<std::size_t>(preds.gold[i])][static_cast<std::size_t>(preds.predicted[i])];
  }
  return cm;
}

}  // namespace

double accuracy(const PredictionSet& preds) {
  validate(preds);
  return accuracy_of(confusion(preds));
}

std::array<ClassScores, kNumClasses> per_class_scores(const PredictionSet& preds) {
  validate(preds);
  return scores_of(confusion(preds));
}

double macro_f1(const PredictionSet& preds) {
  validate(preds);
  return macro_of(confusion(preds));
}

BootstrapResult bootstrap_test(const PredictionSet& system_a, const PredictionSet& system_b,
                               int resamples, Rng& rng) {
  validate(system_a);
  validate(system_b);
  if (resamples < 1) throw std::invalid_argument("bootstrap_test: need at least one resample");
  if (system_a.size() != system_b.size()) throw Error("bootstrap_test: id sets differ");

  // Align system_b to system_a's order by id.
  std::vector<std::size_t> b_index(system_a.size());
  {
    std::vector<std::size_t> order(system_b.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return system_b.ids[x] < system_b.ids[y]; });
    for (std::size_t i = 0; i < system_a.size(); ++i) {
      auto it = std::lower_bound(order.begin(), order.end(), system_a.ids[i],
                                 [&](std::size_t x, const std::string& id) { return system_b.ids[x] < id; });
      if (it == order.end() || system_b.ids[*it] != system_a.ids[i]) {
        throw Error(fmt::format("bootstrap_test: id '{}' missing from second system", system_a.ids[i]));
      }
      if (system_b.gold[*it] != system_a.gold[i]) {
        throw Error(fmt::format("bootstrap_test: gold label differs for id '{}'", system_a.ids[i]));
      }
      b_index[i] = *it;
    }
  }

  const std::size_t n = system_a.size();
  int not_better_acc = 0;
  int not_better_f1 = 0;
  for (int r = 0; r < resamples; ++r) {
    Confusion ca{}, cb{};
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = rng.below(n);
      const auto g = static_cast<std::size_t>(system_a.gold[i]);
      ++ca[g][static_cast<std::size_t>(system_a.predicted[i])];
      ++cb[g][static_cast<std::size_t>(system_b.predicted[b_index[i]])];
    }
    if (!(accuracy_of(ca) > accuracy_of(cb))) ++not_better_acc;
    if (!(macro_of(ca) > macro_of(cb))) ++not_better_f1;
  }
  BootstrapResult out;
  out.resamples = resamples;
  out.p_accuracy = static_cast<double>(not_better_acc) / resamples;
  out.p_macro_f1 = static_cast<double>(not_better_f1) / resamples;
  return out;
}

std::string format_metrics(const std::string& section, const PredictionSet& preds) {
  const auto scores = per_class_scores(preds);
  std::string out = fmt::format("[{}]\n", section);
  out += fmt::format("instances = {}\n", preds.size());
  out += fmt::format("accuracy = {:.6f}\n", accuracy(preds));
  out += fmt::format("macro_f1 = {:.6f}\n", macro_f1(preds));
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto name = to_string(static_cast<Sentiment>(c));
    out += fmt::format("{}.precision = {:.6f}\n", name, scores[c].precision);
    out += fmt::format("{}.recall = {:.6f}\n", name, scores[c].recall);
    out += fmt::format("{}.f1 = {:.6f}\n", name, scores[c].f1);
    out += fmt::format("{}.support = {}\n", name, scores[c].support);
  }
  return out;
}

}  // namespace pssa
