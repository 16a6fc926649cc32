#include "pssa/objective.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace pssa {

const double* ExpectedDistribution::find(std::size_t position) const {
  for (const auto& e : entries_) {
    if (e.position == position) return &e.weight;
  }
  return nullptr;
}

ExpectedDistribution expected_distribution(std::span<const std::size_t> active,
                                           std::span<const std::size_t> misleading) {
  std::vector<std::size_t> all(active.begin(), active.end());
  all.insert(all.end(), misleading.begin(), misleading.end());
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
    throw Error("expected_distribution: s_a and s_m must be disjoint sets");
  }
  ExpectedDistribution out;
  const double share = active.empty() ? 0.0 : 1.0 / static_cast<double>(active.size());
  for (auto p : active) out.entries_.push_back({p, share});
  for (auto p : misleading) out.entries_.push_back({p, 0.0});
  return out;
}

double regularizer(std::span<const double> alpha, const ExpectedDistribution& target) {
  double total = 0.0;
  for (const auto& e : target.entries()) {
    if (e.position >= alpha.size()) {
      throw Error(fmt::format("regularizer: position {} outside attention vector", e.position));
    }
    const double diff = alpha[e.position] - e.weight;
    total += diff * diff;
  }
  return total;
}

void accumulate_regularizer_grad(std::span<const double> alpha,
                                 const ExpectedDistribution& target, double scale,
                                 std::span<double> grad_alpha) {
  for (const auto& e : target.entries()) {
    grad_alpha[e.position] += scale * 2.0 * (alpha[e.position] - e.weight);
  }
}

}  // namespace pssa
