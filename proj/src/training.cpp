#include "pssa/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

namespace pssa {

double default_gamma(std::string_view dataset_name) {
  std::string lower(dataset_name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower.find("rest") != std::string::npos) return 0.5;
  return 0.1;
}

void validate(const MinedInstance& mined) {
  validate(mined.instance);
  validate(mined.sets, mined.instance);
  if (!(mined.expected == expected_distribution(mined.sets))) {
    throw Error(fmt::format("instance {}: expected distribution does not match s_a/s_m",
                            mined.instance.id));
  }
}

TrainResult train_examples(ModelParams params, std::span<const TrainExample> corpus,
                           const TrainConfig& config, std::span<const Instance> validation) {
  if (corpus.empty()) throw Error("train: empty corpus");
  if (config.batch_size == 0) throw std::invalid_argument("train: batch size must be positive");
  if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");

  Rng rng(config.seed);
  AdamState adam;
  ModelParams grads = params.zeros_like();
  auto param_ptrs = params.tensors();
  auto grad_ptrs_mut = grads.tensors();
  std::array<const Tensor*, 6> grad_ptrs;
  std::copy(grad_ptrs_mut.begin(), grad_ptrs_mut.end(), grad_ptrs.begin());

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  std::optional<ModelParams> best;
  double best_f1 = -1.0;
  int stale = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t b = start; b < end; ++b) {
        const auto& ex = corpus[order[b]];
        ForwardOptions opts;
        opts.dropout = config.dropout;
        opts.rng = &rng;
        try {
          const bool separate_reg = !config.regularize_with_dropout && !ex.expected.empty() &&
                                    config.gamma != 0.0;
          Supervision sup{separate_reg ? nullptr : &ex.expected, config.gamma, true};
          double value = loss_and_grads(params, ex.instance, ex.masked, sup, opts, grads, scale);
          if (separate_reg) {
            Supervision reg_only{&ex.expected, config.gamma, false};
            value += loss_and_grads(params, ex.instance, ex.masked, reg_only, {}, grads, scale);
          }
          epoch_loss += value;
        } catch (const NumericalError& e) {
          throw NumericalError(fmt::format("{} (epoch {}, batch {})", e.what(), epoch, batch_no));
        }
      }
      if (!config.train_embeddings) {
        grads.aspect_embedding.fill(0.0);
        grads.memory_embedding.fill(0.0);
        grads.context_embedding.fill(0.0);
      }
      adam_step(param_ptrs, grad_ptrs, adam, config.learning_rate);
      for (auto* g : grad_ptrs_mut) g->fill(0.0);
    }
    if (!params.all_finite()) {
      throw NumericalError(fmt::format("parameters diverged in epoch {}", epoch));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(corpus.size());
    if (!validation.empty()) {
      const auto preds = predict_all(params, validation);
      rec.validation_accuracy = accuracy(preds);
      rec.validation_macro_f1 = macro_f1(preds);
      if (*rec.validation_macro_f1 > best_f1) {
        best_f1 = *rec.validation_macro_f1;
        best = params;
        result.best_epoch = epoch;
        stale = 0;
      } else {
        ++stale;
      }
    }
    result.history.push_back(rec);
    if (config.patience > 0 && stale >= config.patience) break;
  }
  result.params = best ? std::move(*best) : std::move(params);
  return result;
}

TrainResult train(ModelParams params, std::span<const Instance> corpus, const TrainConfig& config,
                  std::span<const Instance> validation) {
  std::vector<TrainExample> examples;
  examples.reserve(corpus.size());
  for (const auto& inst : corpus) examples.push_back({inst, {}, {}});
  return train_examples(std::move(params), examples, config, validation);
}

TrainResult train_supervised(ModelParams params, std::span<const MinedInstance> corpus,
                             const TrainConfig& config, std::span<const Instance> validation) {
  std::vector<TrainExample> examples;
  examples.reserve(corpus.size());
  for (const auto& m : corpus) {
    validate(m);
    examples.push_back({m.instance, {}, m.expected});
  }
  return train_examples(std::move(params), examples, config, validation);
}

PredictionSet predict_all(const ModelParams& params, std::span<const Instance> instances) {
  PredictionSet out;
  for (const auto& inst : instances) out.push_back(inst.id, inst.label, predict(params, inst));
  return out;
}

void write_history(const std::filesystem::path& path, std::span<const EpochRecord> history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << "epoch\ttrain_loss\tvalidation_accuracy\tvalidation_macro_f1\n";
  for (const auto& r : history) {
    out << fmt::format("{}\t{:.17g}\t{}\t{}\n", r.epoch, r.train_loss,
                       r.validation_accuracy ? fmt::format("{:.17g}", *r.validation_accuracy) : "-",
                       r.validation_macro_f1 ? fmt::format("{:.17g}", *r.validation_macro_f1) : "-");
  }
}

}  // namespace pssa
