#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "request/corpus.hpp"

namespace request {

/// Multiset of feature strings. Ordered so iteration is deterministic.
struct FeatureVector {
  std::map<std::string, std::size_t> counts;

  void add(std::string feature, std::size_t n = 1) { counts[std::move(feature)] += n; }
  std::size_t count(std::string_view feature) const {
    auto it = counts.find(std::string(feature));
    return it == counts.end() ? 0 : it->second;
  }
  std::size_t total() const;
  bool operator==(const FeatureVector&) const = default;
};

/// Token surface -> hierarchical cluster bit-string.
class BrownClusterMap {
 public:
  BrownClusterMap() = default;

  /// Adds a mapping. Throws ValidationError if `path` is not a 0/1 string.
  void add(std::string token, std::string path);
  const std::string* find(std::string_view token) const;
  std::size_t size() const { return paths_.size(); }

 private:
  std::unordered_map<std::string, std::string> paths_;
};

/// Reads the common "bitstring<ws>token<ws>frequency" format.
BrownClusterMap load_brown_clusters(const std::filesystem::path& path);

struct FeatureConfig {
  std::size_t window = 3;
  std::vector<std::size_t> prefix_lengths = {4, 8, 12};
};

/// Lexical features of an ordered entity-mention pair in its sentence.
///
/// Emitted kinds, with multiplicity:
///   HEAD_EM{1,2}_<tok>      syntactic head of each mention
///   TKN_EM{1,2}_<tok>       every token inside each mention
///   BETWEEN_<tok>           every token strictly between the mentions
///   BPOS_<tag>              POS tag of every between-token
///   <a>_<b>                 bigrams in the left/right window of each mention
///   EM1_BEFORE_EM2 | EM2_BEFORE_EM1
///   EM_DISTANCE_<n>         token count strictly between the mentions
///   <tok>                   unigram immediately before/after each mention
///   PATTERN_EM1_IN_EM2 | PATTERN_NULL
///   <len>_<prefix>          Brown cluster prefixes of mention tokens
///
/// Whitespace inside a token is replaced by '_'. Throws ContractViolation if
/// the spans are identical or outside the sentence.
FeatureVector extract_features(const EntityMention& m1, const EntityMention& m2,
                               const Sentence& sentence, const BrownClusterMap& brown,
                               const FeatureConfig& cfg);

}  // namespace request
