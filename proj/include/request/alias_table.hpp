#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "request/random.hpp"

namespace request {

/// Walker/Vose alias table: O(n) build, O(1) weighted draws.
class AliasTable {
 public:
  AliasTable() = default;
  /// Weights must be finite, non-negative and not all zero.
  explicit AliasTable(std::span<const double> weights);

  std::uint32_t sample(Rng& rng) const;

  std::size_t size() const { return prob_.size(); }
  bool empty() const { return prob_.empty(); }
  /// Normalized input distribution.
  const std::vector<double>& distribution() const { return dist_; }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
  std::vector<double> dist_;
};

}  // namespace request
