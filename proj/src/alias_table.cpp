#include "request/alias_table.hpp"

#include <cmath>

#include "request/error.hpp"

namespace request {

AliasTable::AliasTable(std::span<const double> weights) {
  const auto n = weights.size();
  if (n == 0) throw ContractViolation("alias table needs at least one weight");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ContractViolation("alias table weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw ContractViolation("alias table weights sum to zero");

  dist_.resize(n);
  prob_.resize(n);
  alias_.resize(n);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    dist_[i] = weights[i] / total;
    scaled[i] = dist_[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (auto i : large) prob_[i] = 1.0, alias_[i] = i;
  for (auto i : small) prob_[i] = 1.0, alias_[i] = i;
}

std::uint32_t AliasTable::sample(Rng& rng) const {
  const auto i = static_cast<std::uint32_t>(uniform_index(rng, prob_.size()));
  return uniform01(rng) < prob_[i] ? i : alias_[i];
}

}  // namespace request
