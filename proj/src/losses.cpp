#include "request/losses.hpp"

#include <algorithm>
#include <limits>

#include "request/error.hpp"

namespace request {

double feature_term(std::span<const double> object, std::span<const double> positive,
                    const std::vector<std::span<const double>>& negatives) {
  double v = log_sigmoid(dot(object, positive));
  for (const auto& n : negatives) v += log_sigmoid(-dot(object, n));
  return v;
}

FeatureTermGradient feature_term_gradient(std::span<const double> object,
                                          std::span<const double> positive,
                                          const std::vector<std::span<const double>>& negatives) {
  const auto d = object.size();
  FeatureTermGradient g;
  g.d_object.assign(d, 0.0);
  g.d_positive.assign(d, 0.0);
  const double sp = dot(object, positive);
  g.value = log_sigmoid(sp);
  // d/dx log σ(x) = 1 - σ(x)
  const double gp = 1.0 - sigmoid(sp);
  for (std::size_t i = 0; i < d; ++i) {
    g.d_object[i] += gp * positive[i];
    g.d_positive[i] = gp * object[i];
  }
  for (const auto& n : negatives) {
    const double sn = dot(object, n);
    g.value += log_sigmoid(-sn);
    const double gn = -sigmoid(sn);
    auto& dn = g.d_negatives.emplace_back(d);
    for (std::size_t i = 0; i < d; ++i) {
      g.d_object[i] += gn * n[i];
      dn[i] = gn * object[i];
    }
  }
  return g;
}

PartialLabelArgmax partial_label_argmax(std::span<const double> z,
                                        std::span<const TypeId> candidates, const Matrix& types) {
  const auto k = types.rows();
  if (candidates.empty()) throw ContractViolation("partial-label loss: empty candidate set");
  std::vector<bool> is_cand(k, false);
  std::size_t distinct = 0;
  for (auto t : candidates) {
    if (t >= k) throw ContractViolation("partial-label loss: candidate type out of range");
    if (!is_cand[t]) ++distinct;
    is_cand[t] = true;
  }
  if (distinct == k) throw ContractViolation("partial-label loss: candidates cover every type");

  constexpr double lowest = -std::numeric_limits<double>::infinity();
  PartialLabelArgmax a;
  double best = lowest, rival = lowest;
  for (TypeId t = 0; t < k; ++t) {
    const double s = dot(z, types.row(t));
    if (is_cand[t] && s > best) {
      best = s;
      a.best = t;
    } else if (!is_cand[t] && s > rival) {
      rival = s;
      a.rival = t;
    }
  }
  a.margin = best - rival;
  return a;
}

double partial_label_loss(std::span<const double> z, std::span<const TypeId> candidates,
                          const Matrix& types) {
  return partial_label_argmax(z, candidates, types).loss();
}

PartialLabelGradient partial_label_gradient(std::span<const double> z,
                                            std::span<const TypeId> candidates,
                                            const Matrix& types, double lambda) {
  PartialLabelGradient g;
  g.argmax = partial_label_argmax(z, candidates, types);
  const auto rb = types.row(g.argmax.best);
  const auto rr = types.row(g.argmax.rival);
  const auto d = z.size();
  g.d_z.resize(d);
  g.d_best.resize(d);
  g.d_rival.resize(d);
  const double on = g.argmax.active() ? 1.0 : 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    g.d_z[i] = -on * (rb[i] - rr[i]) + lambda * z[i];
    g.d_best[i] = -on * z[i] + lambda * rb[i];
    g.d_rival[i] = on * z[i] + lambda * rr[i];
  }
  return g;
}

QaTripleGradient qa_triple_gradient(std::span<const double> pk, std::span<const double> pk1,
                                    std::span<const double> pk2, double lambda) {
  QaTripleGradient g;
  g.loss = qa_triple_loss(pk, pk1, pk2);
  g.active = g.loss > 0.0;
  const double on = g.active ? 1.0 : 0.0;
  const auto d = pk.size();
  g.d_k.resize(d);
  g.d_k1.resize(d);
  g.d_k2.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    g.d_k[i] = -on * (pk1[i] - pk2[i]) + lambda * pk[i];
    g.d_k1[i] = -on * pk[i] + lambda * pk1[i];
    g.d_k2[i] = on * pk[i] + lambda * pk2[i];
  }
  return g;
}

double qa_pairwise_loss(std::uint32_t k, const QuestionGroup& group, const Matrix& pairs) {
  if (std::find(group.positives.begin(), group.positives.end(), k) == group.positives.end())
    throw ContractViolation("qa_pairwise_loss: pair is not a positive of the question");
  double loss = 0.0;
  const auto pk = pairs.row(k);
  for (auto k1 : group.positives) {
    if (k1 == k) continue;
    for (auto k2 : group.negatives) loss += qa_triple_loss(pk, pairs.row(k1), pairs.row(k2));
  }
  return loss;
}

}  // namespace request
