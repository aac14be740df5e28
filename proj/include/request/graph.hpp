#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "request/alias_table.hpp"
#include "request/corpus.hpp"
#include "request/features.hpp"

namespace request {

using FeatureId = std::uint32_t;

/// Union feature vocabulary over the RE and QA sides. Ids follow the
/// lexicographic order of the feature strings.
class FeatureVocabulary {
 public:
  static constexpr std::uint8_t kInRe = 1;
  static constexpr std::uint8_t kInQa = 2;

  FeatureVocabulary() = default;
  /// `strings` must be sorted and unique.
  FeatureVocabulary(std::vector<std::string> strings, std::vector<std::uint8_t> flags,
                    std::vector<std::uint32_t> d_f_re, std::vector<std::uint32_t> d_f_qa);

  std::size_t size() const { return strings_.size(); }
  std::optional<FeatureId> find(std::string_view feature) const;
  const std::string& string(FeatureId id) const { return strings_[id]; }

  bool in_re(FeatureId id) const { return flags_[id] & kInRe; }
  bool in_qa(FeatureId id) const { return flags_[id] & kInQa; }
  bool shared(FeatureId id) const { return in_re(id) && in_qa(id); }
  std::uint8_t flags(FeatureId id) const { return flags_[id]; }

  /// Number of relation mentions (resp. QA pairs) co-occurring with a feature.
  std::uint32_t d_f_re(FeatureId id) const { return d_f_re_[id]; }
  std::uint32_t d_f_qa(FeatureId id) const { return d_f_qa_[id]; }

  std::size_t num_re() const;
  std::size_t num_qa() const;
  std::size_t num_shared() const;

 private:
  std::vector<std::string> strings_;
  std::vector<std::uint8_t> flags_;
  std::vector<std::uint32_t> d_f_re_;
  std::vector<std::uint32_t> d_f_qa_;
  std::unordered_map<std::string, FeatureId> index_;
};

struct Edge {
  std::uint32_t object = 0;
  FeatureId feature = 0;
  std::uint32_t weight = 1;

  bool operator==(const Edge&) const = default;
};

struct EdgeList {
  std::vector<Edge> edges;  // sorted by (object, feature), keys unique

  std::uint64_t total_weight() const;
  std::size_t size() const { return edges.size(); }
  bool empty() const { return edges.empty(); }
};

/// Negative-sampling distribution over one side's features, P(f) ∝ D_f^{3/4}.
struct NoiseDistribution {
  static constexpr double kExponent = 0.75;

  std::vector<FeatureId> features;  // support; every weight strictly positive
  AliasTable table;

  bool empty() const { return features.empty(); }
  FeatureId sample(Rng& rng) const { return features[table.sample(rng)]; }
  /// Exact probability of each support entry, aligned with `features`.
  const std::vector<double>& probabilities() const { return table.distribution(); }
};

struct QuestionGroup {
  std::string question_id;
  std::vector<std::uint32_t> positives;  // pair indices
  std::vector<std::uint32_t> negatives;

  /// Number of (k, k1, k2) triples with k != k1 both positive.
  std::uint64_t triple_count() const {
    const std::uint64_t p = positives.size();
    return p < 2 ? 0 : p * (p - 1) * negatives.size();
  }
};

/// Heterogeneous network linking relation mentions, QA pairs, features,
/// relation types and questions.
struct HeterogeneousGraph {
  FeatureVocabulary vocab;
  TypeSet types;
  FeatureConfig feature_config;

  std::vector<std::string> mention_ids;
  std::vector<std::vector<TypeId>> mention_candidates;
  std::vector<std::string> pair_ids;
  std::vector<Polarity> pair_polarity;
  std::vector<QuestionGroup> question_groups;

  EdgeList re_edges;
  EdgeList qa_edges;

  NoiseDistribution noise_re;
  NoiseDistribution noise_qa;
  AliasTable edge_table_re;
  AliasTable edge_table_qa;

  std::size_t num_mentions() const { return mention_ids.size(); }
  std::size_t num_pairs() const { return pair_ids.size(); }
  std::size_t num_features() const { return vocab.size(); }
  std::size_t num_types() const { return types.size(); }

  /// Rebuilds noise and edge tables from the vocabulary and edge lists.
  void rebuild_samplers();
};

/// Extracted inputs of the network, independent of sentence text.
struct GraphInputs {
  TypeSet types;
  FeatureConfig feature_config;
  std::vector<std::string> mention_ids;
  std::vector<FeatureVector> mention_features;
  std::vector<std::vector<TypeId>> mention_candidates;
  std::vector<std::string> pair_ids;
  std::vector<FeatureVector> pair_features;
  std::vector<Polarity> pair_polarity;
  std::vector<std::string> pair_questions;
  std::vector<std::string> question_ids;  // group order
};

/// Throws ValidationError if the RE side is empty.
HeterogeneousGraph assemble_graph(const GraphInputs& inputs);

/// Extracts features of every mention and QA pair and assembles the network.
/// An empty QA corpus yields a graph with an empty QA side.
HeterogeneousGraph build_graph(const LabeledCorpus& re, const QACorpus& qa,
                               const FeatureConfig& cfg, const BrownClusterMap& brown);

struct SharedFeatureStats {
  std::size_t shared = 0;
  std::size_t re_distinct_total = 0;
  std::size_t qa_distinct_total = 0;
  std::uint64_t re_shared_weight = 0;
  std::uint64_t re_total_weight = 0;
  std::uint64_t qa_shared_weight = 0;
  std::uint64_t qa_total_weight = 0;

  /// Fractions in [0, 1]; zero when the side is empty.
  double re_distinct() const;
  double re_occurrence() const;
  double qa_distinct() const;
  double qa_occurrence() const;

  std::string to_json() const;
};

SharedFeatureStats shared_feature_stats(const HeterogeneousGraph& g);

/// Persists the network as a directory of tab-separated text files.
void save_graph(const HeterogeneousGraph& g, const std::filesystem::path& dir);
HeterogeneousGraph load_graph(const std::filesystem::path& dir);

}  // namespace request
