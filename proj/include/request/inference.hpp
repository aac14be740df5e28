#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "request/corpus.hpp"
#include "request/embedding.hpp"
#include "request/features.hpp"
#include "request/graph.hpp"

namespace request {

enum class Similarity { cosine, dot };

std::string_view to_string(Similarity s);
Similarity parse_similarity(std::string_view name);

struct InferenceConfig {
  double eta = 0.35;
  Similarity similarity = Similarity::cosine;
};

struct TestEmbedding {
  std::vector<double> vector;
  std::size_t known_features = 0;    // distinct features found in the vocabulary
  std::size_t unknown_features = 0;  // distinct features skipped
};

/// Multiplicity-weighted sum of the feature rows of `features`.
TestEmbedding embed_test_mention(const FeatureVector& features, const EmbeddingStore& store,
                                 const FeatureVocabulary& vocab);

struct Prediction {
  std::optional<TypeId> type;  // empty means None
  double score = 0.0;          // best similarity over target types
};

/// Nearest target type (None excluded); None when ‖z‖ = 0 or the best
/// similarity is below eta. Ties go to the lowest type id.
Prediction predict_type(std::span<const double> z, const EmbeddingStore& store,
                        const InferenceConfig& cfg);

struct PredictionRecord {
  std::string mention_id;
  std::string type;  // type name, "None" for no relation
  double score = 0.0;
  std::size_t known_features = 0;
};

/// Embeds every test mention and predicts its type. Throws IntegrityError
/// when the model and graph disagree in shape.
std::vector<PredictionRecord> predict_corpus(const LabeledCorpus& test,
                                             const HeterogeneousGraph& graph,
                                             const EmbeddingStore& store,
                                             const BrownClusterMap& brown,
                                             const InferenceConfig& cfg);

/// Tab-separated "mention_id type score known_features" lines.
std::string format_predictions(const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> parse_predictions(const std::string& text,
                                                const std::string& source = "<memory>");
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

}  // namespace request
