#include "request/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "request/losses.hpp"

namespace request {

std::string_view to_string(TrainMode m) {
  switch (m) {
    case TrainMode::joint:
      return "joint";
    case TrainMode::qa_then_re:
      return "qa_then_re";
    case TrainMode::re_then_qa:
      return "re_then_qa";
  }
  return "joint";
}

TrainMode parse_train_mode(std::string_view name) {
  if (name == "joint") return TrainMode::joint;
  if (name == "qa_then_re") return TrainMode::qa_then_re;
  if (name == "re_then_qa") return TrainMode::re_then_qa;
  throw ContractViolation("unknown training mode '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (dim == 0) throw ContractViolation("dim must be positive");
  if (!(lambda >= 0.0)) throw ContractViolation("lambda must be non-negative");
  if (negatives < 1) throw ContractViolation("negatives (V) must be at least 1");
  if (!(alpha > 0.0)) throw ContractViolation("alpha must be positive");
  if (!(re_qa_mix >= 0.0 && re_qa_mix <= 1.0))
    throw ContractViolation("re_qa_mix must lie in [0, 1]");
  if (check_every == 0) throw ContractViolation("check_every must be positive");
  if (batch_size == 0) throw ContractViolation("batch_size must be positive");
  if (threads == 0) throw ContractViolation("threads must be positive");
  if (!(convergence_tol >= 0.0)) throw ContractViolation("convergence_tol must be non-negative");
}

// ---------------------------------------------------------------------------
// Sampling

QaTripleSampler::QaTripleSampler(const HeterogeneousGraph& g) {
  for (const auto& grp : g.question_groups)
    if (grp.triple_count() > 0) eligible_.push_back(&grp);
}

std::optional<QaTriple> QaTripleSampler::draw(Rng& rng) const {
  if (eligible_.empty()) return std::nullopt;
  const auto& grp = *eligible_[uniform_index(rng, eligible_.size())];
  const auto np = grp.positives.size();
  const auto a = uniform_index(rng, np);
  auto b = uniform_index(rng, np - 1);
  if (b >= a) ++b;
  const auto c = uniform_index(rng, grp.negatives.size());
  return QaTriple{grp.positives[a], grp.positives[b], grp.negatives[c]};
}

std::optional<FeatureSample> draw_feature_sample(const EdgeList& edges, const AliasTable& edge_table,
                                                 const NoiseDistribution& noise,
                                                 std::size_t negatives, Rng& rng) {
  if (edges.empty() || noise.empty()) return std::nullopt;
  const auto& e = edges.edges[edge_table.sample(rng)];
  FeatureSample s;
  s.object = e.object;
  s.positive = e.feature;
  s.negatives.resize(negatives);
  for (auto& n : s.negatives) n = noise.sample(rng);
  return s;
}

// ---------------------------------------------------------------------------
// Updates

void apply_feature_step(Matrix& objects, Matrix& features, const FeatureSample& s, double alpha) {
  const auto d = objects.cols();
  auto x = objects.row(s.object);
  thread_local std::vector<double> acc;
  thread_local std::vector<double> coef;
  acc.assign(d, 0.0);
  coef.resize(s.negatives.size() + 1);

  // Scores and gradient of the object row, all at the pre-step point.
  {
    const auto c = features.row(s.positive);
    coef[0] = 1.0 - sigmoid(dot(x, c));
    for (std::size_t i = 0; i < d; ++i) acc[i] += coef[0] * c[i];
  }
  for (std::size_t v = 0; v < s.negatives.size(); ++v) {
    const auto c = features.row(s.negatives[v]);
    coef[v + 1] = -sigmoid(dot(x, c));
    for (std::size_t i = 0; i < d; ++i) acc[i] += coef[v + 1] * c[i];
  }
  auto update = [&](FeatureId f, double g) {
    auto c = features.row(f);
    for (std::size_t i = 0; i < d; ++i) c[i] += alpha * g * x[i];
  };
  update(s.positive, coef[0]);
  for (std::size_t v = 0; v < s.negatives.size(); ++v) update(s.negatives[v], coef[v + 1]);
  for (std::size_t i = 0; i < d; ++i) x[i] += alpha * acc[i];
}

namespace {

void shrink(std::span<double> row, double factor) {
  if (factor == 1.0) return;
  for (double& v : row) v *= factor;
}

}  // namespace

void apply_partial_label_step(EmbeddingStore& store, std::uint32_t mention,
                              std::span<const TypeId> candidates, double alpha, double lambda) {
  auto z = store.Z.row(mention);
  const auto a = partial_label_argmax(z, candidates, store.R);
  auto rb = store.R.row(a.best);
  auto rr = store.R.row(a.rival);
  if (a.active()) {
    thread_local std::vector<double> z_old;
    z_old.assign(z.begin(), z.end());
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] += alpha * (rb[i] - rr[i]);
      rb[i] += alpha * z_old[i];
      rr[i] -= alpha * z_old[i];
    }
  }
  const double factor = 1.0 - alpha * lambda;
  shrink(z, factor);
  shrink(rb, factor);
  shrink(rr, factor);
}

void apply_qa_step(Matrix& pairs, const QaTriple& t, double alpha, double lambda) {
  auto pk = pairs.row(t.k);
  auto p1 = pairs.row(t.k1);
  auto p2 = pairs.row(t.k2);
  if (qa_triple_loss(pk, p1, p2) > 0.0) {
    thread_local std::vector<double> pk_old;
    pk_old.assign(pk.begin(), pk.end());
    for (std::size_t i = 0; i < pk.size(); ++i) {
      pk[i] += alpha * (p1[i] - p2[i]);
      p1[i] += alpha * pk_old[i];
      p2[i] -= alpha * pk_old[i];
    }
  }
  const double factor = 1.0 - alpha * lambda;
  shrink(pk, factor);
  shrink(p1, factor);
  shrink(p2, factor);
}

bool sgd_step_zf(EmbeddingStore& store, const HeterogeneousGraph& g, Rng& rng,
                 std::size_t negatives, double alpha) {
  auto s = draw_feature_sample(g.re_edges, g.edge_table_re, g.noise_re, negatives, rng);
  if (!s) return false;
  apply_feature_step(store.Z, store.C, *s, alpha);
  return true;
}

bool sgd_step_pf(EmbeddingStore& store, const HeterogeneousGraph& g, Rng& rng,
                 std::size_t negatives, double alpha) {
  auto s = draw_feature_sample(g.qa_edges, g.edge_table_qa, g.noise_qa, negatives, rng);
  if (!s) return false;
  apply_feature_step(store.P, store.C, *s, alpha);
  return true;
}

void sgd_step_partial_label(EmbeddingStore& store, const HeterogeneousGraph& g, Rng& rng,
                            double alpha, double lambda) {
  const auto i = static_cast<std::uint32_t>(uniform_index(rng, g.num_mentions()));
  apply_partial_label_step(store, i, g.mention_candidates[i], alpha, lambda);
}

bool sgd_step_qa_pairwise(EmbeddingStore& store, const QaTripleSampler& sampler, Rng& rng,
                          double alpha, double lambda) {
  auto t = sampler.draw(rng);
  if (!t) return false;
  apply_qa_step(store.P, *t, alpha, lambda);
  return true;
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

/// Striped row locks for the multi-worker mode. Rows of all four matrices
/// share one global index space.
class RowLocks {
 public:
  static constexpr std::size_t kStripes = 4096;

  explicit RowLocks(const EmbeddingStore& s)
      : p_offset_(s.Z.rows()),
        c_offset_(p_offset_ + s.P.rows()),
        r_offset_(c_offset_ + s.C.rows()),
        num_types_(s.R.rows()),
        mutexes_(kStripes) {}

  std::size_t z(std::size_t i) const { return i; }
  std::size_t p(std::size_t i) const { return p_offset_ + i; }
  std::size_t c(std::size_t i) const { return c_offset_ + i; }
  std::size_t r(std::size_t i) const { return r_offset_ + i; }
  std::size_t num_types() const { return num_types_; }

  class Guard {
   public:
    Guard(RowLocks& owner, std::vector<std::size_t>& rows) : owner_(owner) {
      stripes_.clear();
      for (auto r : rows) stripes_.push_back(r % kStripes);
      std::sort(stripes_.begin(), stripes_.end());
      stripes_.erase(std::unique(stripes_.begin(), stripes_.end()), stripes_.end());
      for (auto s : stripes_) owner_.mutexes_[s].lock();
    }
    ~Guard() {
      for (auto it = stripes_.rbegin(); it != stripes_.rend(); ++it) owner_.mutexes_[*it].unlock();
    }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    RowLocks& owner_;
    std::vector<std::size_t> stripes_;
  };

 private:
  std::size_t p_offset_, c_offset_, r_offset_, num_types_;
  std::vector<std::mutex> mutexes_;
};

struct Phase {
  std::string name;
  double re_mix;
};

std::vector<Phase> phases_for(const TrainConfig& cfg, bool has_qa) {
  switch (cfg.mode) {
    case TrainMode::joint:
      return {{"joint", has_qa ? cfg.re_qa_mix : 1.0}};
    case TrainMode::qa_then_re:
      return {{"qa", 0.0}, {"re", 1.0}};
    case TrainMode::re_then_qa:
      return {{"re", 1.0}, {"qa", 0.0}};
  }
  return {};
}

double monitored(const Phase& ph, const ObjectiveBreakdown& o) {
  if (ph.name == "qa") return o.o_qa();
  if (ph.name == "re") return o.o_z();
  return o.total();
}

class Trainer {
 public:
  Trainer(const HeterogeneousGraph& g, const TrainConfig& cfg)
      : g_(g),
        cfg_(cfg),
        sampler_(g),
        store_(cfg.dim, g.num_mentions(), g.num_pairs(), g.num_features(), g.num_types()),
        start_(std::chrono::steady_clock::now()) {
    Rng init(derive_seed(cfg.seed, "init"));
    store_.init_uniform(init);
  }

  TrainResult run(const TrainProgress& progress) {
    const bool has_qa = !g_.qa_edges.empty() || !sampler_.empty();
    bool all_converged = true;
    for (const auto& ph : phases_for(cfg_, has_qa)) {
      all_converged = run_phase(ph, progress) && all_converged;
    }
    stats_.converged = all_converged;
    return {std::move(store_), std::move(log_), stats_};
  }

 private:
  ObjectiveBreakdown evaluate() const {
    return objective_total(store_, g_, cfg_.lambda, cfg_.negatives,
                           {cfg_.objective_noise_samples, derive_seed(cfg_.seed, "objective")});
  }

  void record(std::uint64_t it, const Phase& ph, const ObjectiveBreakdown& o,
              const TrainProgress& progress) {
    TrainLogEntry e;
    e.iteration = it;
    e.phase = ph.name;
    e.objective = o.total();
    e.objective_re = o.o_z();
    e.objective_qa = o.o_qa();
    e.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
                    .count();
    log_.push_back(e);
    if (progress) progress(e);
  }

  double learning_rate(std::uint64_t t) const {
    const double frac = static_cast<double>(t) / static_cast<double>(cfg_.max_iterations);
    return cfg_.alpha * std::max(0.01, 1.0 - 0.99 * frac);
  }

  /// One iteration of the alternating procedure.
  void iterate(const Phase& ph, Rng& rng, double alpha) {
    const bool re_side = uniform01(rng) < ph.re_mix;
    for (std::size_t b = 0; b < cfg_.batch_size; ++b) {
      if (re_side) {
        sgd_step_zf(store_, g_, rng, cfg_.negatives, alpha);
        sgd_step_partial_label(store_, g_, rng, alpha, cfg_.lambda);
      } else {
        sgd_step_pf(store_, g_, rng, cfg_.negatives, alpha);
        if (!sgd_step_qa_pairwise(store_, sampler_, rng, alpha, cfg_.lambda)) ++qa_noop_local_;
      }
    }
    ++(re_side ? re_local_ : qa_local_);
  }

  /// Same as iterate() under striped row locks.
  void iterate_locked(const Phase& ph, Rng& rng, double alpha, RowLocks& locks,
                      std::vector<std::size_t>& rows, std::uint64_t& re_count,
                      std::uint64_t& qa_count, std::uint64_t& qa_noop) {
    const bool re_side = uniform01(rng) < ph.re_mix;
    for (std::size_t b = 0; b < cfg_.batch_size; ++b) {
      const auto& edges = re_side ? g_.re_edges : g_.qa_edges;
      const auto& table = re_side ? g_.edge_table_re : g_.edge_table_qa;
      const auto& noise = re_side ? g_.noise_re : g_.noise_qa;
      if (auto s = draw_feature_sample(edges, table, noise, cfg_.negatives, rng)) {
        rows.clear();
        rows.push_back(re_side ? locks.z(s->object) : locks.p(s->object));
        rows.push_back(locks.c(s->positive));
        for (auto n : s->negatives) rows.push_back(locks.c(n));
        RowLocks::Guard guard(locks, rows);
        apply_feature_step(re_side ? store_.Z : store_.P, store_.C, *s, alpha);
      }
      if (re_side) {
        const auto i = static_cast<std::uint32_t>(uniform_index(rng, g_.num_mentions()));
        rows.clear();
        rows.push_back(locks.z(i));
        for (std::size_t t = 0; t < locks.num_types(); ++t) rows.push_back(locks.r(t));
        RowLocks::Guard guard(locks, rows);
        apply_partial_label_step(store_, i, g_.mention_candidates[i], alpha, cfg_.lambda);
      } else if (auto t = sampler_.draw(rng)) {
        rows.clear();
        rows.push_back(locks.p(t->k));
        rows.push_back(locks.p(t->k1));
        rows.push_back(locks.p(t->k2));
        RowLocks::Guard guard(locks, rows);
        apply_qa_step(store_.P, *t, alpha, cfg_.lambda);
      } else {
        ++qa_noop;
      }
    }
    ++(re_side ? re_count : qa_count);
  }

  void run_chunk(const Phase& ph, std::uint64_t from, std::uint64_t to, Rng& rng) {
    if (cfg_.threads <= 1) {
      for (auto t = from; t < to; ++t) iterate(ph, rng, learning_rate(t));
      return;
    }
    RowLocks locks(store_);
    const auto n = to - from;
    const auto workers = cfg_.threads;
    std::vector<std::uint64_t> re(workers), qa(workers), noop(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        Rng wrng(derive_seed(cfg_.seed, ph.name + "/" + std::to_string(from) + "/" +
                                            std::to_string(w)));
        std::vector<std::size_t> rows;
        const auto lo = from + n * w / workers;
        const auto hi = from + n * (w + 1) / workers;
        for (auto t = lo; t < hi; ++t)
          iterate_locked(ph, wrng, learning_rate(t), locks, rows, re[w], qa[w], noop[w]);
      });
    }
    for (auto& th : pool) th.join();
    for (std::size_t w = 0; w < workers; ++w) {
      re_local_ += re[w];
      qa_local_ += qa[w];
      qa_noop_local_ += noop[w];
    }
  }

  bool run_phase(const Phase& ph, const TrainProgress& progress) {
    Rng rng(derive_seed(cfg_.seed, "phase/" + ph.name));
    auto o = evaluate();
    const double initial = monitored(ph, o);
    double prev = initial;
    record(stats_.iterations, ph, o, progress);
    if (!std::isfinite(initial)) throw TrainingDiverged("non-finite initial objective");

    bool converged = false;
    std::uint64_t t = 0;
    while (t < cfg_.max_iterations) {
      const auto to = std::min(cfg_.max_iterations, t + cfg_.check_every);
      re_local_ = qa_local_ = qa_noop_local_ = 0;
      run_chunk(ph, t, to, rng);
      stats_.iterations += to - t;
      stats_.re_iterations += re_local_;
      stats_.qa_iterations += qa_local_;
      stats_.qa_noop_steps += qa_noop_local_;
      t = to;

      if (!store_.all_finite()) throw TrainingDiverged("non-finite embedding values");
      o = evaluate();
      const double cur = monitored(ph, o);
      record(stats_.iterations, ph, o, progress);
      if (!std::isfinite(cur)) throw TrainingDiverged("non-finite objective");
      if (initial > 0.0 && cur > 10.0 * initial) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "objective diverged in phase %s: %.6g > 10 x initial %.6g at iteration %llu",
                      ph.name.c_str(), cur, initial,
                      static_cast<unsigned long long>(stats_.iterations));
        throw TrainingDiverged(buf);
      }
      const double rel = std::abs(prev - cur) / std::max(std::abs(prev), 1e-300);
      prev = cur;
      if (rel < cfg_.convergence_tol) {
        converged = true;
        break;
      }
    }
    return converged;
  }

  const HeterogeneousGraph& g_;
  TrainConfig cfg_;
  QaTripleSampler sampler_;
  EmbeddingStore store_;
  std::vector<TrainLogEntry> log_;
  TrainStats stats_;
  std::uint64_t re_local_ = 0, qa_local_ = 0, qa_noop_local_ = 0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

TrainResult train(const HeterogeneousGraph& g, const TrainConfig& cfg,
                  const TrainProgress& progress) {
  cfg.validate();
  if (g.num_mentions() == 0) throw ValidationError("cannot train on a graph without mentions");
  Trainer trainer(g, cfg);
  return trainer.run(progress);
}

std::string format_train_log(const std::vector<TrainLogEntry>& log) {
  std::string out = "iteration,phase,O,O_Z,O_QA,wall_ms\n";
  char buf[256];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%llu,%s,%.17g,%.17g,%.17g,%.3f\n",
                  static_cast<unsigned long long>(e.iteration), e.phase.c_str(), e.objective,
                  e.objective_re, e.objective_qa, e.wall_ms);
    out += buf;
  }
  return out;
}

}  // namespace request
