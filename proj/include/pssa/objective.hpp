#pragma once

// Attention supervision targets and the squared-distance regularizer that
// pulls model attention toward them.

#include <cstddef>
#include <span>
#include <vector>

#include "pssa/dataset.hpp"

namespace pssa {

struct ExpectedWeight {
  std::size_t position;
  double weight;
  friend bool operator==(const ExpectedWeight&, const ExpectedWeight&) = default;
};

/// Target attention: 1/|s_a| on every active position, 0 on every misleading
/// one, nothing elsewhere. Entries are ordered s_a first, then s_m.
class ExpectedDistribution {
 public:
  ExpectedDistribution() = default;

  std::span<const ExpectedWeight> entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  /// Weight listed for `position`, or nullptr when the position is not listed.
  const double* find(std::size_t position) const;

  friend ExpectedDistribution expected_distribution(std::span<const std::size_t>,
                                                    std::span<const std::size_t>);
  friend bool operator==(const ExpectedDistribution&, const ExpectedDistribution&) = default;

 private:
  std::vector<ExpectedWeight> entries_;
};

/// Throws Error when the two sets overlap or contain repeats.
ExpectedDistribution expected_distribution(std::span<const std::size_t> active,
                                           std::span<const std::size_t> misleading);
inline ExpectedDistribution expected_distribution(const SupervisionSets& sets) {
  return expected_distribution(sets.active, sets.misleading);
}

/// Sum over listed positions of (alpha_p - target_p)^2.
double regularizer(std::span<const double> alpha, const ExpectedDistribution& target);

/// Adds scale * d(regularizer)/d(alpha) into `grad_alpha`.
void accumulate_regularizer_grad(std::span<const double> alpha,
                                 const ExpectedDistribution& target, double scale,
                                 std::span<double> grad_alpha);

}  // namespace pssa
