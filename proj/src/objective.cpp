#include "request/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "request/error.hpp"
#include "request/losses.hpp"

namespace request {

namespace {

void check_shapes(const EmbeddingStore& s, const HeterogeneousGraph& g) {
  if (s.Z.rows() != g.num_mentions() || s.P.rows() != g.num_pairs() ||
      s.C.rows() != g.num_features() || s.R.rows() != g.num_types())
    throw ContractViolation("embedding store shape does not match the graph");
}

/// Weighted support used to evaluate the noise expectation.
struct NoiseSupport {
  std::vector<FeatureId> features;
  std::vector<double> weights;
};

NoiseSupport noise_support(const NoiseDistribution& nd, const NoiseExpectation& how,
                           std::string_view side) {
  NoiseSupport s;
  if (nd.empty()) return s;
  if (how.samples == 0) {
    s.features = nd.features;
    s.weights = nd.probabilities();
    return s;
  }
  Rng rng(derive_seed(how.seed, side));
  const double w = 1.0 / static_cast<double>(how.samples);
  for (std::size_t i = 0; i < how.samples; ++i) {
    s.features.push_back(nd.sample(rng));
    s.weights.push_back(w);
  }
  return s;
}

double ns_likelihood(const Matrix& objects, const Matrix& C, const EdgeList& edges,
                     const NoiseSupport& noise, std::size_t negatives) {
  double total = 0.0;
  std::size_t e = 0;
  while (e < edges.size()) {
    const auto obj = edges.edges[e].object;
    const auto x = objects.row(obj);
    double observed = 0.0;
    std::uint64_t weight = 0;
    for (; e < edges.size() && edges.edges[e].object == obj; ++e) {
      const auto& edge = edges.edges[e];
      observed += edge.weight * log_sigmoid(dot(x, C.row(edge.feature)));
      weight += edge.weight;
    }
    double expect = 0.0;
    for (std::size_t i = 0; i < noise.features.size(); ++i)
      expect += noise.weights[i] * log_sigmoid(-dot(x, C.row(noise.features[i])));
    total += observed + static_cast<double>(negatives) * static_cast<double>(weight) * expect;
  }
  return total;
}

}  // namespace

double objective_zf(const EmbeddingStore& store, const HeterogeneousGraph& g) {
  check_shapes(store, g);
  std::vector<FeatureId> support;
  for (FeatureId f = 0; f < g.num_features(); ++f)
    if (g.vocab.in_re(f)) support.push_back(f);
  double loss = 0.0;
  std::vector<double> scores(support.size());
  std::size_t e = 0;
  const auto& edges = g.re_edges.edges;
  while (e < edges.size()) {
    const auto obj = edges[e].object;
    const auto z = store.Z.row(obj);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < support.size(); ++i) {
      scores[i] = dot(z, store.C.row(support[i]));
      mx = std::max(mx, scores[i]);
    }
    double sum = 0.0;
    for (double s : scores) sum += std::exp(s - mx);
    const double lse = mx + std::log(sum);
    for (; e < edges.size() && edges[e].object == obj; ++e)
      loss -= edges[e].weight * (dot(z, store.C.row(edges[e].feature)) - lse);
  }
  return loss;
}

double objective_zf_ns(const EmbeddingStore& store, const HeterogeneousGraph& g,
                       std::size_t negatives, const NoiseExpectation& noise) {
  check_shapes(store, g);
  return ns_likelihood(store.Z, store.C, g.re_edges, noise_support(g.noise_re, noise, "re"),
                       negatives);
}

double objective_pf_ns(const EmbeddingStore& store, const HeterogeneousGraph& g,
                       std::size_t negatives, const NoiseExpectation& noise) {
  check_shapes(store, g);
  return ns_likelihood(store.P, store.C, g.qa_edges, noise_support(g.noise_qa, noise, "qa"),
                       negatives);
}

ObjectiveBreakdown objective_total(const EmbeddingStore& store, const HeterogeneousGraph& g,
                                   double lambda, std::size_t negatives,
                                   const NoiseExpectation& noise) {
  check_shapes(store, g);
  ObjectiveBreakdown o;
  o.l_zf = -objective_zf_ns(store, g, negatives, noise);
  for (std::size_t i = 0; i < g.num_mentions(); ++i)
    o.hinge_re += partial_label_loss(store.Z.row(i), g.mention_candidates[i], store.R);
  o.reg_re = 0.5 * lambda * (store.Z.squared_norm() + store.R.squared_norm());

  o.l_pf = -objective_pf_ns(store, g, negatives, noise);
  for (const auto& grp : g.question_groups)
    for (auto k : grp.positives) o.hinge_qa += qa_pairwise_loss(k, grp, store.P);
  o.reg_qa = 0.5 * lambda * store.P.squared_norm();
  return o;
}

}  // namespace request
