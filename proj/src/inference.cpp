#include "request/inference.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "request/error.hpp"
#include "request/losses.hpp"

namespace request {

std::string_view to_string(Similarity s) { return s == Similarity::cosine ? "cosine" : "dot"; }

Similarity parse_similarity(std::string_view name) {
  if (name == "cosine") return Similarity::cosine;
  if (name == "dot") return Similarity::dot;
  throw ContractViolation("unknown similarity '" + std::string(name) + "'");
}

TestEmbedding embed_test_mention(const FeatureVector& features, const EmbeddingStore& store,
                                 const FeatureVocabulary& vocab) {
  TestEmbedding out;
  out.vector.assign(store.dim, 0.0);
  for (const auto& [f, count] : features.counts) {
    auto id = vocab.find(f);
    if (!id) {
      ++out.unknown_features;
      continue;
    }
    ++out.known_features;
    const auto c = store.C.row(*id);
    for (std::size_t i = 0; i < store.dim; ++i) out.vector[i] += static_cast<double>(count) * c[i];
  }
  return out;
}

Prediction predict_type(std::span<const double> z, const EmbeddingStore& store,
                        const InferenceConfig& cfg) {
  Prediction p;
  const double zn = std::sqrt(dot(z, z));
  if (zn == 0.0 || store.R.rows() <= 1) return p;
  std::optional<TypeId> best;
  double best_score = 0.0;
  for (TypeId t = 0; t < store.R.rows(); ++t) {
    if (t == kNoneType) continue;
    const auto r = store.R.row(t);
    double s = dot(z, r);
    if (cfg.similarity == Similarity::cosine) {
      const double rn = std::sqrt(dot(r, r));
      s = rn == 0.0 ? 0.0 : s / (zn * rn);
    }
    if (!best || s > best_score) {
      best = t;
      best_score = s;
    }
  }
  p.score = best_score;
  if (best_score >= cfg.eta) p.type = best;
  return p;
}

std::vector<PredictionRecord> predict_corpus(const LabeledCorpus& test,
                                             const HeterogeneousGraph& graph,
                                             const EmbeddingStore& store,
                                             const BrownClusterMap& brown,
                                             const InferenceConfig& cfg) {
  if (store.C.rows() != graph.num_features())
    throw IntegrityError("model has " + std::to_string(store.C.rows()) +
                         " feature rows but the vocabulary has " +
                         std::to_string(graph.num_features()));
  if (store.R.rows() != graph.num_types())
    throw IntegrityError("model and graph disagree on the number of relation types");
  std::vector<PredictionRecord> out;
  out.reserve(test.mentions.size());
  for (const auto& m : test.mentions) {
    const auto fv = extract_features(m.m1, m.m2, test.sentences.at(m.m1.sentence_id), brown,
                                     graph.feature_config);
    const auto emb = embed_test_mention(fv, store, graph.vocab);
    const auto p = predict_type(emb.vector, store, cfg);
    out.push_back({m.id, p.type ? graph.types.name(*p.type) : std::string(kNoneTypeName), p.score,
                   emb.known_features});
  }
  return out;
}

std::string format_predictions(const std::vector<PredictionRecord>& records) {
  std::string out;
  char buf[64];
  for (const auto& r : records) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, r.score);
    out += r.mention_id + '\t' + r.type + '\t' + std::string(buf, end) + '\t' +
           std::to_string(r.known_features) + '\n';
  }
  return out;
}

std::vector<PredictionRecord> parse_predictions(const std::string& text, const std::string& source) {
  std::vector<PredictionRecord> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::istringstream ls(line);
    std::string col;
    while (std::getline(ls, col, '\t')) cols.push_back(col);
    if (cols.size() < 2) throw ParseError(source, line_no, "expected at least 2 columns");
    PredictionRecord r;
    r.mention_id = cols[0];
    r.type = cols[1];
    if (cols.size() > 2) {
      auto res = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), r.score);
      if (res.ec != std::errc()) throw ParseError(source, line_no, "bad score");
    }
    if (cols.size() > 3) {
      auto res = std::from_chars(cols[3].data(), cols[3].data() + cols[3].size(), r.known_features);
      if (res.ec != std::errc()) throw ParseError(source, line_no, "bad known-feature count");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_predictions(ss.str(), path.string());
}

}  // namespace request
