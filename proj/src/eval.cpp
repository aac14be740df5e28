#include "request/eval.hpp"

#include <cstdio>
#include <unordered_map>

#include <json.hpp>

#include "request/error.hpp"

namespace request {

namespace {

double safe_div(std::size_t a, std::size_t b) {
  return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

bool is_none(const std::string& t) { return t == kNoneTypeName; }

}  // namespace

double TypeMetrics::precision() const { return safe_div(correct, predicted); }
double TypeMetrics::recall() const { return safe_div(correct, gold); }
double TypeMetrics::f1() const { return harmonic(precision(), recall()); }

MetricsReport evaluate(std::span<const PredictionRecord> predictions,
                       std::span<const PredictionRecord> gold) {
  std::unordered_map<std::string, const PredictionRecord*> gold_by_id;
  for (const auto& g : gold)
    if (!gold_by_id.emplace(g.mention_id, &g).second)
      throw IntegrityError("duplicate gold mention id '" + g.mention_id + "'");
  if (predictions.size() != gold.size())
    throw IntegrityError("prediction and gold files cover different mention sets");

  MetricsReport r;
  std::unordered_map<std::string, bool> seen;
  for (const auto& p : predictions) {
    auto it = gold_by_id.find(p.mention_id);
    if (it == gold_by_id.end())
      throw IntegrityError("prediction for unknown mention '" + p.mention_id + "'");
    if (!seen.emplace(p.mention_id, true).second)
      throw IntegrityError("duplicate prediction for mention '" + p.mention_id + "'");
    const auto& gt = it->second->type;
    if (!is_none(p.type)) {
      ++r.predicted;
      ++r.per_type[p.type].predicted;
      if (p.type == gt) {
        ++r.correct;
        ++r.per_type[p.type].correct;
      }
    }
    if (!is_none(gt)) {
      ++r.gold;
      ++r.per_type[gt].gold;
    }
  }
  r.precision = safe_div(r.correct, r.predicted);
  r.recall = safe_div(r.correct, r.gold);
  r.f1 = harmonic(r.precision, r.recall);
  return r;
}

std::string MetricsReport::to_json() const {
  nlohmann::json types = nlohmann::json::object();
  for (const auto& [name, m] : per_type)
    types[name] = {{"precision", m.precision()}, {"recall", m.recall()}, {"f1", m.f1()},
                   {"predicted", m.predicted},   {"gold", m.gold},       {"correct", m.correct}};
  nlohmann::json j = {{"precision", precision}, {"recall", recall}, {"f1", f1},
                      {"predicted", predicted}, {"gold", gold},     {"correct", correct},
                      {"per_type", types}};
  return j.dump(2);
}

std::string MetricsReport::to_table() const {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %9s %9s %9s %9s %9s %9s\n", "type", "precision", "recall",
                "f1", "predicted", "gold", "correct");
  out += buf;
  for (const auto& [name, m] : per_type) {
    std::snprintf(buf, sizeof buf, "%-24s %9.4f %9.4f %9.4f %9zu %9zu %9zu\n", name.c_str(),
                  m.precision(), m.recall(), m.f1(), m.predicted, m.gold, m.correct);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-24s %9.4f %9.4f %9.4f %9zu %9zu %9zu\n", "overall", precision,
                recall, f1, predicted, gold, correct);
  out += buf;
  return out;
}

std::vector<EtaSweepRow> sweep_eta(const LabeledCorpus& test, const HeterogeneousGraph& graph,
                                   const EmbeddingStore& store, const BrownClusterMap& brown,
                                   const InferenceConfig& base, std::span<const double> etas,
                                   std::span<const PredictionRecord> gold) {
  std::vector<EtaSweepRow> rows;
  for (double eta : etas) {
    auto cfg = base;
    cfg.eta = eta;
    const auto preds = predict_corpus(test, graph, store, brown, cfg);
    EtaSweepRow row;
    row.eta = eta;
    row.metrics = evaluate(preds, gold);
    for (const auto& p : preds)
      if (is_none(p.type)) ++row.none_predictions;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_sweep(const std::vector<EtaSweepRow>& rows) {
  std::string out = "eta\tprecision\trecall\tf1\tnone_predictions\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.4f\t%.6f\t%.6f\t%.6f\t%zu\n", r.eta, r.metrics.precision,
                  r.metrics.recall, r.metrics.f1, r.none_predictions);
    out += buf;
  }
  return out;
}

}  // namespace request
