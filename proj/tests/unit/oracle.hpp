#pragma once

// Monte-Carlo checks that the sampled training terms are unbiased estimators
// of the exactly enumerated objective.

#include <cmath>
#include <string>
#include <vector>

#include "request/graph.hpp"
#include "request/losses.hpp"
#include "request/objective.hpp"
#include "request/qa_pairs.hpp"
#include "request/synth.hpp"
#include "request/trainer.hpp"

namespace fixtures {

using namespace request;

struct McCheck {
  std::string name;
  double exact = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  double z() const { return std_error > 0 ? std::abs(mean - exact) / std_error : std::abs(mean - exact) * 1e300; }
};

class Welford {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  double mean() const { return mean_; }
  double std_error() const {
    return n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1) / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0, m2_ = 0.0;
};

// A small synthetic graph with both sides populated.
inline HeterogeneousGraph oracle_graph(std::uint64_t seed) {
  SynthConfig sc;
  sc.num_types = 4;
  sc.num_mentions = 300;
  sc.num_test_mentions = 10;
  sc.num_questions = 12;
  sc.vocab_size = 200;
  sc.fp_rate = 0.3;
  sc.fn_rate = 0.3;
  sc.seed = seed;
  const auto syn = generate_synthetic(sc);
  PairGenConfig pc;
  pc.seed = seed;
  return build_graph(syn.train, generate_pairs(syn.qa, pc), FeatureConfig{}, {});
}

// Rows ~ N(0, scale^2) so that losses are far from their initial plateau.
inline EmbeddingStore random_store(const HeterogeneousGraph& g, std::size_t d, std::uint64_t seed,
                                   double scale = 0.4) {
  EmbeddingStore s(d, g.num_mentions(), g.num_pairs(), g.num_features(), g.num_types());
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  for (auto* m : {&s.Z, &s.P, &s.C, &s.R})
    for (auto& v : m->data()) v = n(rng);
  return s;
}

inline std::vector<McCheck> check_estimators(std::uint64_t seed, std::size_t samples = 1'000'000) {
  const auto g = oracle_graph(seed);
  const auto store = random_store(g, 8, seed + 1);
  const std::size_t V = 3;
  Rng rng(seed + 2);
  std::vector<McCheck> out;

  auto side = [&](const char* name, const Matrix& objects, const EdgeList& edges,
                  const AliasTable& table, const NoiseDistribution& noise, double exact) {
    Welford w;
    const double W = static_cast<double>(edges.total_weight());
    std::vector<std::span<const double>> negs(V);
    for (std::size_t i = 0; i < samples; ++i) {
      const auto s = draw_feature_sample(edges, table, noise, V, rng);
      for (std::size_t v = 0; v < V; ++v) negs[v] = store.C.row(s->negatives[v]);
      w.add(W * feature_term(objects.row(s->object), store.C.row(s->positive), negs));
    }
    out.push_back({name, exact, w.mean(), w.std_error()});
  };
  side("objective_zf_ns", store.Z, g.re_edges, g.edge_table_re, g.noise_re,
       objective_zf_ns(store, g, V));
  side("objective_pf_ns", store.P, g.qa_edges, g.edge_table_qa, g.noise_qa,
       objective_pf_ns(store, g, V));

  {
    double exact = 0.0;
    for (std::size_t i = 0; i < g.num_mentions(); ++i)
      exact += partial_label_loss(store.Z.row(i), g.mention_candidates[i], store.R);
    Welford w;
    const double N = static_cast<double>(g.num_mentions());
    for (std::size_t i = 0; i < samples; ++i) {
      const auto m = uniform_index(rng, g.num_mentions());
      w.add(N * partial_label_loss(store.Z.row(m), g.mention_candidates[m], store.R));
    }
    out.push_back({"partial_label_hinge", exact, w.mean(), w.std_error()});
  }

  {
    // Enumerate every question's pairwise loss; the sampler picks an eligible
    // question uniformly and then a uniform triple within it.
    QaTripleSampler sampler(g);
    double exact = 0.0;
    std::unordered_map<std::uint32_t, double> weight;  // anchor pair -> Q * T_q
    for (const auto& grp : g.question_groups) {
      if (grp.triple_count() == 0) continue;
      for (auto k : grp.positives) {
        exact += qa_pairwise_loss(k, grp, store.P);
        weight[k] = static_cast<double>(sampler.eligible_questions()) *
                    static_cast<double>(grp.triple_count());
      }
    }
    Welford w;
    for (std::size_t i = 0; i < samples; ++i) {
      const auto t = sampler.draw(rng);
      w.add(weight.at(t->k) * qa_triple_loss(store.P.row(t->k), store.P.row(t->k1), store.P.row(t->k2)));
    }
    out.push_back({"qa_pairwise_hinge", exact, w.mean(), w.std_error()});
  }
  return out;
}

}  // namespace fixtures
