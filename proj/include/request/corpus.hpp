#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace request {

using TypeId = std::uint32_t;

inline constexpr std::string_view kNoneTypeName = "None";
inline constexpr TypeId kNoneType = 0;

struct Token {
  std::string surface;
  std::string pos;

  bool operator==(const Token&) const = default;
};

/// Half-open token interval [start, end).
struct TokenSpan {
  std::uint32_t start = 0;
  std::uint32_t end = 0;

  std::uint32_t size() const { return end - start; }
  bool contains(const TokenSpan& other) const {
    return start <= other.start && other.end <= end;
  }
  bool operator==(const TokenSpan&) const = default;
};

struct EntityMention {
  std::string sentence_id;
  TokenSpan span;
  std::uint32_t head = 0;

  bool operator==(const EntityMention&) const = default;
};

/// A tokenized, POS-tagged sentence with its pre-annotated entity mentions.
struct Sentence {
  std::string id;
  std::vector<Token> tokens;
  std::vector<EntityMention> mentions;

  bool operator==(const Sentence&) const = default;
};

/// Space-joined surface string of the tokens in `span`.
std::string surface(const Sentence& sentence, TokenSpan span);

struct RelationType {
  TypeId id = 0;
  std::string name;

  bool operator==(const RelationType&) const = default;
};

/// Relation type inventory. Id 0 is always the reserved None type.
class TypeSet {
 public:
  TypeSet();

  /// Returns the id of `name`, registering it when unseen.
  TypeId intern(std::string_view name);
  std::optional<TypeId> find(std::string_view name) const;
  const std::string& name(TypeId id) const;
  std::size_t size() const { return types_.size(); }
  const std::vector<RelationType>& all() const { return types_; }

  bool operator==(const TypeSet& other) const { return types_ == other.types_; }

 private:
  std::vector<RelationType> types_;
  std::unordered_map<std::string, TypeId> index_;
};

struct RelationMention {
  std::string id;
  EntityMention m1;
  EntityMention m2;
  std::vector<TypeId> candidate_types;  // sorted, unique

  bool is_negative() const {
    return candidate_types.size() == 1 && candidate_types.front() == kNoneType;
  }
  bool operator==(const RelationMention&) const = default;
};

enum class Polarity { positive, negative };

std::string_view to_string(Polarity p);

struct Question {
  std::string id;
  std::string sentence_id;
  std::optional<EntityMention> question_entity;

  bool operator==(const Question&) const = default;
};

struct AnswerSentence {
  std::string question_id;
  Polarity polarity = Polarity::negative;
  std::string sentence_id;
  std::optional<TokenSpan> answer_span;

  bool operator==(const AnswerSentence&) const = default;
};

struct QAPair {
  std::string id;
  std::string question_id;
  EntityMention m1;
  EntityMention m2;
  Polarity polarity = Polarity::negative;

  bool operator==(const QAPair&) const = default;
};

/// Sentences in file order with an id index.
class SentenceStore {
 public:
  /// Throws IntegrityError on a duplicate id.
  void add(Sentence s);
  const Sentence* find(std::string_view id) const;
  /// Throws IntegrityError when `id` does not resolve.
  const Sentence& at(std::string_view id) const;
  const std::vector<Sentence>& all() const { return sentences_; }
  std::size_t size() const { return sentences_.size(); }

  bool operator==(const SentenceStore& other) const {
    return sentences_ == other.sentences_;
  }

 private:
  std::vector<Sentence> sentences_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct LabeledCorpus {
  SentenceStore sentences;
  std::vector<RelationMention> mentions;
  TypeSet types;

  bool operator==(const LabeledCorpus&) const = default;
};

struct QACorpus {
  SentenceStore sentences;
  std::vector<Question> questions;
  std::vector<AnswerSentence> answers;
  std::vector<QAPair> pairs;

  /// Ids of questions that have no answer sentence at all.
  std::vector<std::string> empty_questions() const;

  bool operator==(const QACorpus&) const = default;
};

/// Loads a JSON-lines relation-extraction corpus. Throws ParseError on a
/// malformed line, IntegrityError on dangling references and
/// ValidationError on invariant violations.
LabeledCorpus load_re_corpus(const std::filesystem::path& path);
LabeledCorpus parse_re_corpus(std::string_view text, const std::string& source = "<memory>");
void save_re_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path);
std::string serialize_re_corpus(const LabeledCorpus& corpus);

QACorpus load_qa_corpus(const std::filesystem::path& path);
QACorpus parse_qa_corpus(std::string_view text, const std::string& source = "<memory>");
void save_qa_corpus(const QACorpus& corpus, const std::filesystem::path& path);
std::string serialize_qa_corpus(const QACorpus& corpus);

/// Uniformly selects round(ratio * n) of the given unlinkable mentions
/// without replacement and labels each with {None}. Output preserves input
/// order. Throws ContractViolation unless 0 < ratio <= 1.
std::vector<RelationMention> sample_negative_mentions(std::span<const RelationMention> unlinkable,
                                                      double ratio, std::uint64_t seed);

/// Overload over raw entity-mention pairs; ids are derived from the spans.
std::vector<RelationMention> sample_negative_mentions(
    std::span<const std::pair<EntityMention, EntityMention>> unlinkable_pairs, double ratio,
    std::uint64_t seed);

}  // namespace request
