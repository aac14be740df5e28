#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "request/embedding.hpp"
#include "request/error.hpp"
#include "request/graph.hpp"
#include "request/objective.hpp"

namespace request {

enum class TrainMode { joint, qa_then_re, re_then_qa };

std::string_view to_string(TrainMode m);
/// Throws ContractViolation on an unknown name.
TrainMode parse_train_mode(std::string_view name);

struct TrainConfig {
  std::size_t dim = 50;
  double lambda = 1e-4;
  std::size_t negatives = 3;
  /// Initial learning rate; decays linearly to alpha/100 over max_iterations.
  double alpha = 0.025;
  /// Probability of picking the RE objective in an iteration.
  double re_qa_mix = 0.5;
  std::uint64_t max_iterations = 40'000'000;
  double convergence_tol = 1e-4;
  std::uint64_t check_every = 200'000;
  /// Edges (and hinge samples) drawn per component per iteration.
  std::size_t batch_size = 1;
  TrainMode mode = TrainMode::joint;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  /// Noise features used to evaluate the objective at each check; 0 = exact.
  std::size_t objective_noise_samples = 64;

  /// Throws ContractViolation on out-of-range values.
  void validate() const;
};

/// One sampled mention-feature (or pair-feature) edge with its noise draws.
struct FeatureSample {
  std::uint32_t object = 0;
  FeatureId positive = 0;
  std::vector<FeatureId> negatives;
};

struct QaTriple {
  std::uint32_t k = 0;   // anchor positive
  std::uint32_t k1 = 0;  // other positive
  std::uint32_t k2 = 0;  // negative
};

/// Uniform draws over valid (k, k1, k2) triples of a uniformly chosen
/// eligible question (>= 2 positives and >= 1 negative).
class QaTripleSampler {
 public:
  explicit QaTripleSampler(const HeterogeneousGraph& g);

  bool empty() const { return eligible_.empty(); }
  std::size_t eligible_questions() const { return eligible_.size(); }
  std::optional<QaTriple> draw(Rng& rng) const;

 private:
  std::vector<const QuestionGroup*> eligible_;
};

/// Returns nothing when the edge list or noise distribution is empty.
std::optional<FeatureSample> draw_feature_sample(const EdgeList& edges, const AliasTable& edge_table,
                                                 const NoiseDistribution& noise,
                                                 std::size_t negatives, Rng& rng);

/// Gradient ascent on log σ(xᵀc) + Σ log σ(-xᵀc_v); every gradient is taken
/// at the pre-step point. Touches the object row and V+1 feature rows.
void apply_feature_step(Matrix& objects, Matrix& features, const FeatureSample& s, double alpha);

/// Partial-label hinge step on mention `mention`: if active,
/// z += α(r_best - r_rival), r_best += αz, r_rival -= αz; then the three
/// rows shrink by (1 - αλ).
void apply_partial_label_step(EmbeddingStore& store, std::uint32_t mention,
                              std::span<const TypeId> candidates, double alpha, double lambda);

/// QA triple hinge step: if active, p_k += α(p_k1 - p_k2), p_k1 += αp_k,
/// p_k2 -= αp_k; then the three rows shrink by (1 - αλ).
void apply_qa_step(Matrix& pairs, const QaTriple& t, double alpha, double lambda);

/// One sampled step of each kind. Each returns false when it had nothing to
/// sample (no-op).
bool sgd_step_zf(EmbeddingStore& store, const HeterogeneousGraph& g, Rng& rng,
                 std::size_t negatives, double alpha);
bool sgd_step_pf(EmbeddingStore& store, const HeterogeneousGraph& g, Rng& rng,
                 std::size_t negatives, double alpha);
void sgd_step_partial_label(EmbeddingStore& store, const HeterogeneousGraph& g, Rng& rng,
                            double alpha, double lambda);
bool sgd_step_qa_pairwise(EmbeddingStore& store, const QaTripleSampler& sampler, Rng& rng,
                          double alpha, double lambda);

struct TrainLogEntry {
  std::uint64_t iteration = 0;
  std::string phase;
  double objective = 0.0;
  double objective_re = 0.0;
  double objective_qa = 0.0;
  double wall_ms = 0.0;
};

struct TrainStats {
  std::uint64_t iterations = 0;
  std::uint64_t re_iterations = 0;
  std::uint64_t qa_iterations = 0;
  std::uint64_t qa_noop_steps = 0;
  bool converged = false;
};

struct TrainResult {
  EmbeddingStore store;
  std::vector<TrainLogEntry> log;
  TrainStats stats;
};

/// Raised when the monitored objective exceeds ten times its initial value
/// or a non-finite value appears.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

using TrainProgress = std::function<void(const TrainLogEntry&)>;

/// Alternating edge-sampling stochastic subgradient training. With
/// threads == 1 the result is a deterministic function of (graph, cfg).
TrainResult train(const HeterogeneousGraph& g, const TrainConfig& cfg,
                  const TrainProgress& progress = {});

/// CSV log: iteration,phase,O,O_Z,O_QA,wall_ms
std::string format_train_log(const std::vector<TrainLogEntry>& log);

}  // namespace request
