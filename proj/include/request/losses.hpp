#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "request/corpus.hpp"
#include "request/embedding.hpp"
#include "request/graph.hpp"

namespace request {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log σ(x), stable for large |x|.
inline double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

/// Negative-sampling log-likelihood of one observed (object, feature) edge
/// with V sampled noise features:
///   log σ(z·c) + Σ_v log σ(-z·c_v)
/// and its gradient with respect to every involved row (ascent direction).
struct FeatureTermGradient {
  double value = 0.0;
  std::vector<double> d_object;
  std::vector<double> d_positive;
  std::vector<std::vector<double>> d_negatives;
};

double feature_term(std::span<const double> object, std::span<const double> positive,
                    const std::vector<std::span<const double>>& negatives);
FeatureTermGradient feature_term_gradient(std::span<const double> object,
                                          std::span<const double> positive,
                                          const std::vector<std::span<const double>>& negatives);

/// Arg-maxes of the partial-label hinge: best candidate and best
/// non-candidate type (lowest id on ties).
struct PartialLabelArgmax {
  TypeId best = 0;
  TypeId rival = 0;
  double margin = 0.0;  // φ(z, best) - φ(z, rival)

  double loss() const { return margin < 1.0 ? 1.0 - margin : 0.0; }
  bool active() const { return margin < 1.0; }
};

/// Throws ContractViolation when `candidates` is empty or covers all types.
PartialLabelArgmax partial_label_argmax(std::span<const double> z,
                                        std::span<const TypeId> candidates, const Matrix& types);

/// max{0, 1 - [max_{r∈cand} zᵀr - max_{r'∉cand} zᵀr']}
double partial_label_loss(std::span<const double> z, std::span<const TypeId> candidates,
                          const Matrix& types);

/// Subgradient of ℓ + (λ/2)(‖z‖² + ‖r_best‖² + ‖r_rival‖²) (descent sign).
struct PartialLabelGradient {
  PartialLabelArgmax argmax;
  std::vector<double> d_z;
  std::vector<double> d_best;
  std::vector<double> d_rival;
};
PartialLabelGradient partial_label_gradient(std::span<const double> z,
                                            std::span<const TypeId> candidates,
                                            const Matrix& types, double lambda);

/// max{0, 1 - [p_k·p_k1 - p_k·p_k2]}
inline double qa_triple_loss(std::span<const double> pk, std::span<const double> pk1,
                             std::span<const double> pk2) {
  const double margin = dot(pk, pk1) - dot(pk, pk2);
  return margin < 1.0 ? 1.0 - margin : 0.0;
}

/// Subgradient of the triple hinge + (λ/2)(‖p_k‖² + ‖p_k1‖² + ‖p_k2‖²).
struct QaTripleGradient {
  double loss = 0.0;
  bool active = false;
  std::vector<double> d_k;
  std::vector<double> d_k1;
  std::vector<double> d_k2;
};
QaTripleGradient qa_triple_gradient(std::span<const double> pk, std::span<const double> pk1,
                                    std::span<const double> pk2, double lambda);

/// Full pairwise margin loss of positive pair `k` against its question:
/// Σ_{k1∈P+, k1≠k} Σ_{k2∈P-} max{0, 1 - [φ(p_k,p_k1) - φ(p_k,p_k2)]}.
/// Throws ContractViolation if `k` is not a positive pair of `group`.
double qa_pairwise_loss(std::uint32_t k, const QuestionGroup& group, const Matrix& pairs);

}  // namespace request
