#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "request/corpus.hpp"
#include "request/inference.hpp"

namespace request {

/// Shape of a generated distantly supervised corpus.
///
/// Every target type owns a disjoint set of indicative words; a clean
/// mention of that type places some of them between its two entities,
/// padded with background words. Training labels are then corrupted: a
/// `fp_rate` fraction of linkable mentions gains a wrong extra candidate and
/// a `fn_rate` fraction is relabeled None. QA questions are each about one
/// type; their positive answer sentences use that type's words (a `qa_share`
/// fraction of them also used by the RE corpus), negatives use background.
/// Label noise can be tied to a noise-prone subset of each type's words,
/// so that particular features are systematically mislabeled.
struct SynthConfig {
  std::size_t num_types = 24;
  std::size_t num_mentions = 20'000;
  std::size_t num_test_mentions = 2'000;
  std::size_t num_questions = 500;
  std::size_t vocab_size = 3'000;
  /// Words between the two entities, of which indicative_per_mention come
  /// from the type's set (none for None mentions).
  std::size_t features_per_mention = 6;
  std::size_t indicative_per_mention = 3;
  double fp_rate = 0.0;
  double fn_rate = 0.0;
  double qa_share = 0.5;
  /// Fraction of mentions whose true label is None.
  double none_fraction = 0.2;
  /// Fraction of mentions phrased with the noise-prone subset of their
  /// type's words (about the same fraction of the words is noise-prone).
  double noise_prone_fraction = 1.0 / 3.0;
  /// Share of the label noise that lands on noise-prone mentions on top of
  /// their uniform share: 0 corrupts mentions uniformly at random.
  double noise_concentration = 0.8;
  std::size_t positives_per_question = 16;
  /// Indicative words in a positive answer sentence.
  std::size_t qa_indicative_per_answer = 6;
  std::size_t negatives_per_question = 3;
  /// Fraction of negative answer sentences that express another relation
  /// type between the entities instead of background words.
  double qa_other_relation_negatives = 0.0;
  /// Draw QA background words and entity names from their own pools.
  bool separate_qa_context = true;
  std::uint64_t seed = 0;

  /// Throws ContractViolation on out-of-range rates or an infeasible shape.
  void validate() const;
};

struct SynthCorpus {
  LabeledCorpus train;
  LabeledCorpus test;  // candidate sets carry the clean gold type
  std::vector<PredictionRecord> gold;
  QACorpus qa;  // questions and answers only; pairs come from generate_pairs
  std::vector<TypeId> train_true_types;  // clean label of each training mention
};

SynthCorpus generate_synthetic(const SynthConfig& cfg);

}  // namespace request
