#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "request/inference.hpp"

namespace request {

struct TypeMetrics {
  std::size_t predicted = 0;
  std::size_t gold = 0;
  std::size_t correct = 0;

  double precision() const;
  double recall() const;
  double f1() const;
};

/// Mention-level precision/recall/F1 over non-None labels.
struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t predicted = 0;  // non-None predictions
  std::size_t gold = 0;       // non-None gold labels
  std::size_t correct = 0;    // non-None predictions equal to gold
  std::map<std::string, TypeMetrics> per_type;

  std::string to_json() const;
  std::string to_table() const;
};

/// Gold records use the prediction format with the gold type in the type
/// column. Throws IntegrityError unless both cover the same mention ids.
MetricsReport evaluate(std::span<const PredictionRecord> predictions,
                       std::span<const PredictionRecord> gold);

struct EtaSweepRow {
  double eta = 0.0;
  MetricsReport metrics;
  std::size_t none_predictions = 0;
};

/// Predicts the test corpus once per threshold and scores each run.
std::vector<EtaSweepRow> sweep_eta(const LabeledCorpus& test, const HeterogeneousGraph& graph,
                                   const EmbeddingStore& store, const BrownClusterMap& brown,
                                   const InferenceConfig& base, std::span<const double> etas,
                                   std::span<const PredictionRecord> gold);

std::string format_sweep(const std::vector<EtaSweepRow>& rows);

}  // namespace request
