#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "request/corpus.hpp"

namespace request {

struct PairGenConfig {
  /// Cap on negative pairs sampled from one answer sentence (>= 1).
  std::size_t neg_pairs_per_sentence = 6;
  /// Also sample negative pairs from positive answer sentences.
  bool sample_negatives_from_positives = false;
  std::uint64_t seed = 0;
};

struct PairGenReport {
  std::size_t questions_processed = 0;
  std::size_t questions_without_entity = 0;
  std::size_t positive_sentences_dropped = 0;
  std::size_t positive_pairs = 0;
  std::size_t negative_pairs = 0;

  std::string to_json() const;
};

std::size_t levenshtein(std::string_view a, std::string_view b);

/// The entity mention of the question sentence with the greatest start index.
std::optional<EntityMention> detect_question_entity(const Question& q, const Sentence& sentence);

/// Among answer-sentence mentions sharing the question entity's head token
/// (case-insensitive), the one with minimal surface edit distance; ties go to
/// the earliest start.
std::optional<EntityMention> match_question_entity(const EntityMention& question_entity,
                                                   const Sentence& question_sentence,
                                                   const Sentence& answer_sentence);

/// The mention whose surface equals the answer-span surface exactly.
/// Throws ContractViolation on a negative sentence.
std::optional<EntityMention> match_answer_entity(const AnswerSentence& answer,
                                                 const Sentence& answer_sentence);

/// Returns a copy of `corpus` whose pairs are replaced by freshly generated
/// positive and negative QA entity-mention pairs.
QACorpus generate_pairs(const QACorpus& corpus, const PairGenConfig& cfg,
                        PairGenReport* report = nullptr);

}  // namespace request
