#pragma once

#include <cstddef>
#include <cstdint>

#include "request/embedding.hpp"
#include "request/graph.hpp"

namespace request {

/// How the noise expectation E_{f~Pn}[log σ(-xᵀc_f)] is evaluated.
struct NoiseExpectation {
  /// 0 enumerates the full noise distribution (exact). Otherwise the
  /// expectation is replaced by the mean over this many features drawn once
  /// from Pn with `seed`; the same draw is reused on every call.
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Exact softmax form: -Σ_i Σ_j w_ij log p(f_j | z_i) with the softmax taken
/// over the RE-side features. Oracle only; cost O(N_Z · M_z · d).
double objective_zf(const EmbeddingStore& store, const HeterogeneousGraph& g);

/// Σ_ij w_ij [log σ(z_iᵀc_j) + V · E_{f~Pn}[log σ(-z_iᵀc_f)]], the
/// negative-sampling log-likelihood of the RE side (≤ 0).
double objective_zf_ns(const EmbeddingStore& store, const HeterogeneousGraph& g,
                       std::size_t negatives, const NoiseExpectation& noise = {});

/// Same as objective_zf_ns for QA pairs against the QA noise distribution.
double objective_pf_ns(const EmbeddingStore& store, const HeterogeneousGraph& g,
                       std::size_t negatives, const NoiseExpectation& noise = {});

struct ObjectiveBreakdown {
  double l_zf = 0.0;      // -objective_zf_ns
  double hinge_re = 0.0;  // Σ_i ℓ_i over mentions
  double reg_re = 0.0;    // (λ/2)(‖Z‖² + ‖R‖²)
  double l_pf = 0.0;      // -objective_pf_ns
  double hinge_qa = 0.0;  // Σ_i Σ_k ℓ_{i,k}
  double reg_qa = 0.0;    // (λ/2)‖P‖²

  double o_z() const { return l_zf + hinge_re + reg_re; }
  double o_qa() const { return l_pf + hinge_qa + reg_qa; }
  double total() const { return o_z() + o_qa(); }
};

ObjectiveBreakdown objective_total(const EmbeddingStore& store, const HeterogeneousGraph& g,
                                   double lambda, std::size_t negatives,
                                   const NoiseExpectation& noise = {});

}  // namespace request
