#pragma once
// Margin-ranking training: two corrupted triples per positive, summed
// mini-batch subgradients, AdaGrad updates with L2 on relation parameters,
// and entity renormalization after every step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "embedrule/errors.hpp"
#include "embedrule/kb.hpp"
#include "embedrule/model.hpp"
#include "embedrule/parallel.hpp"

namespace embedrule {

inline constexpr double kAdaGradEpsilon = 1e-8;
inline constexpr int kMaxCorruptionAttempts = 100;

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batches = 10;
  double learning_rate = 0.1;
  double margin = 1.0;
  double l2 = 1e-4;
  std::uint64_t seed = 1;
  // Workers computing mini-batch gradients. Results are deterministic for a
  // fixed thread count; 1 is the reference mode.
  std::size_t threads = 1;

  void check() const {
    if (batches == 0) throw ConfigError("batches must be positive");
    if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
    if (!(margin > 0.0)) throw ConfigError("margin must be positive");
    if (!(l2 >= 0.0)) throw ConfigError("l2 must be non-negative");
    if (threads == 0) throw ConfigError("threads must be positive");
  }
};

inline double margin_loss(double positive_score, double negative_score, double margin = 1.0) {
  return std::max(negative_score - positive_score + margin, 0.0);
}

// Replaces the subject (first) and the object (second) of `positive` with
// uniformly drawn entities, redrawing while the result is a training fact.
template <class Rng>
std::pair<Triple, Triple> sample_negatives(const Triple& positive, const TripleStore& store, Rng& rng) {
  const std::size_t n = store.num_entities();
  if (n < 2) throw SamplingError("corruption needs at least two entities");
  std::uniform_int_distribution<EntityId> pick(0, static_cast<EntityId>(n - 1));
  auto corrupt = [&](bool subject) {
    for (int attempt = 0; attempt < kMaxCorruptionAttempts; ++attempt) {
      Triple t = positive;
      (subject ? t.subject : t.object) = pick(rng);
      if (!store.in_train(t)) return t;
    }
    throw SamplingError("no negative found for triple (" + std::to_string(positive.subject) + ", " +
                        std::to_string(positive.relation) + ", " + std::to_string(positive.object) + ") after " +
                        std::to_string(kMaxCorruptionAttempts) + " draws");
  };
  Triple s = corrupt(true);
  Triple o = corrupt(false);
  return {s, o};
}

// Row-sparse accumulator: rows are zero until first touched, and clear()
// only resets touched rows.
class SparseRows {
 public:
  SparseRows() = default;
  SparseRows(std::size_t n_rows, std::size_t width) : width_(width), slot_(n_rows, -1) {}

  std::span<double> row(std::uint32_t id) {
    auto& s = slot_[id];
    if (s < 0) {
      s = static_cast<std::int64_t>(rows_.size());
      rows_.push_back(id);
      data_.resize(data_.size() + width_, 0.0);
    }
    return {data_.data() + static_cast<std::size_t>(s) * width_, width_};
  }

  std::span<const double> row_at(std::size_t k) const { return {data_.data() + k * width_, width_}; }
  const std::vector<std::uint32_t>& touched() const { return rows_; }
  std::size_t width() const { return width_; }
  bool contains(std::uint32_t id) const { return slot_[id] >= 0; }
  std::span<const double> find(std::uint32_t id) const {
    if (slot_[id] < 0) return {};
    return row_at(static_cast<std::size_t>(slot_[id]));
  }

  void add(const SparseRows& other) {
    for (std::size_t k = 0; k < other.rows_.size(); ++k) {
      auto dst = row(other.rows_[k]);
      auto src = other.row_at(k);
      for (std::size_t i = 0; i < width_; ++i) dst[i] += src[i];
    }
  }

  void clear() {
    for (auto id : rows_) slot_[id] = -1;
    rows_.clear();
    data_.clear();
  }

 private:
  std::size_t width_ = 0;
  std::vector<std::int64_t> slot_;
  std::vector<std::uint32_t> rows_;
  std::vector<double> data_;
};

struct SparseGradient {
  SparseRows entities;
  SparseRows relations;

  explicit SparseGradient(const Model& m)
      : entities(m.num_entities(), m.dim()), relations(m.num_relations(), m.layout().size) {}

  void clear() {
    entities.clear();
    relations.clear();
  }
  void add(const SparseGradient& other) {
    entities.add(other.entities);
    relations.add(other.relations);
  }
};

// Accumulated squared gradients, same shape as the model.
struct AdaGradState {
  std::vector<double> entities;
  std::vector<double> relations;

  AdaGradState() = default;
  explicit AdaGradState(const Model& m)
      : entities(m.entity_table().size(), 0.0), relations(m.relation_table().size(), 0.0) {}

  friend bool operator==(const AdaGradState&, const AdaGradState&) = default;
};

// Elementwise AdaGrad: G += g^2; theta -= lr * g / sqrt(G + eps).
inline void adagrad_update(std::span<double> theta, std::span<const double> g, std::span<double> accum, double lr) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    accum[i] += g[i] * g[i];
    theta[i] -= lr * g[i] / std::sqrt(accum[i] + kAdaGradEpsilon);
  }
}

namespace detail {

inline void check_finite(std::span<const double> g, const char* what, std::uint32_t id) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) {
      throw NumericError(std::string("non-finite gradient in ") + what + " " + std::to_string(id) + " at coordinate " +
                         std::to_string(i) + " (value " + std::to_string(g[i]) + ")");
    }
  }
}

}  // namespace detail

// Applies one AdaGrad step. Entity rows are updated where touched; every
// relation block receives the L2 term 2 * l2 * theta on top of its gradient.
inline void adagrad_step(Model& model, const SparseGradient& grads, AdaGradState& state, double lr, double l2) {
  const std::size_t d = model.dim();
  const auto& ent = grads.entities.touched();
  for (std::size_t k = 0; k < ent.size(); ++k) {
    detail::check_finite(grads.entities.row_at(k), "entity", ent[k]);
  }
  const auto& rel = grads.relations.touched();
  for (std::size_t k = 0; k < rel.size(); ++k) {
    detail::check_finite(grads.relations.row_at(k), "relation", rel[k]);
  }
  for (std::size_t k = 0; k < ent.size(); ++k) {
    const auto e = ent[k];
    adagrad_update(model.entity(e), grads.entities.row_at(k),
                   std::span<double>(state.entities).subspan(std::size_t{e} * d, d), lr);
  }
  const std::size_t width = model.layout().size;
  std::vector<double> g(width);
  for (RelationId r = 0; r < model.num_relations(); ++r) {
    auto theta = model.relation(r);
    auto src = grads.relations.find(r);
    if (src.empty() && l2 == 0.0) continue;
    std::fill(g.begin(), g.end(), 0.0);
    std::copy(src.begin(), src.end(), g.begin());
    for (std::size_t i = 0; i < width; ++i) g[i] += 2.0 * l2 * theta[i];
    adagrad_update(theta, g, std::span<double>(state.relations).subspan(std::size_t{r} * width, width), lr);
  }
}

// Unit-normalizes every entity row; all-zero rows are redrawn at random.
template <class Rng>
void renormalize_entities(Model& model, Rng& rng) {
  for (EntityId e = 0; e < model.num_entities(); ++e) {
    if (!normalize_row(model.entity(e))) randomize_unit_row(model.entity(e), rng);
  }
}

inline void renormalize_entities(Model& model) {
  std::mt19937_64 rng(0);
  renormalize_entities(model, rng);
}

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;  // mean margin loss over all (positive, negative) pairs
  std::size_t active_pairs = 0;
  std::optional<double> valid_mrr;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

// Called after each epoch; may return a validation MRR to record.
using EpochHook = std::function<std::optional<double>(const Model&, const AdaGradState&, std::size_t epoch)>;

namespace detail {

struct ShardResult {
  SparseGradient grad;
  double loss = 0.0;
  std::size_t active = 0;
  explicit ShardResult(const Model& m) : grad(m) {}
};

inline void add_gradient(Workspace& ws, const Model& model, const Triple& t, double scale, SparseGradient& g) {
  // Allocate both rows first: row() may grow storage and invalidate spans.
  g.entities.row(t.subject);
  g.entities.row(t.object);
  ws.accumulate_gradient(model, t, scale, g.entities.row(t.subject), g.entities.row(t.object),
                         g.relations.row(t.relation));
}

inline void accumulate_shard(const Model& model, std::span<const Triple> positives,
                             std::span<const std::pair<Triple, Triple>> negatives, double margin, ShardResult& out) {
  Workspace ws(model.dim());
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const Triple& pos = positives[i];
    const double s_pos = ws.score(model, pos);
    int active = 0;
    for (const Triple& neg : {negatives[i].first, negatives[i].second}) {
      const double loss = margin_loss(s_pos, ws.score(model, neg), margin);
      out.loss += loss;
      if (loss <= 0.0) continue;
      ++active;
      add_gradient(ws, model, neg, 1.0, out.grad);
    }
    if (active > 0) {
      out.active += static_cast<std::size_t>(active);
      add_gradient(ws, model, pos, -static_cast<double>(active), out.grad);
    }
  }
}

}  // namespace detail

// Mini-batch training. Each epoch shuffles the training triples and splits
// them into config.batches contiguous batches; the gradient of every batch
// is summed (not averaged) before one AdaGrad step.
inline TrainHistory train(Model& model, const TripleStore& store, const TrainConfig& config,
                          AdaGradState* state = nullptr, const EpochHook& hook = {}) {
  config.check();
  if (store.train().empty()) throw Error("training split is empty");
  if (model.num_entities() != store.num_entities() || model.num_relations() != store.num_relations()) {
    throw DimensionError("model and data disagree on vocabulary sizes");
  }
  AdaGradState local;
  if (!state) {
    local = AdaGradState(model);
    state = &local;
  }
  TrainHistory history;
  std::mt19937_64 rng(config.seed);
  std::vector<Triple> order = store.train();
  const std::size_t n = order.size();
  const std::size_t n_batches = std::min(config.batches, n);
  const std::size_t n_shards = config.threads;
  std::vector<detail::ShardResult> shards;
  shards.reserve(n_shards);
  for (std::size_t s = 0; s < n_shards; ++s) shards.emplace_back(model);
  SparseGradient total(model);
  std::vector<std::pair<Triple, Triple>> negatives;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats;
    stats.epoch = epoch;
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      const std::size_t lo = b * n / n_batches;
      const std::size_t hi = (b + 1) * n / n_batches;
      std::span<const Triple> batch(order.data() + lo, hi - lo);
      negatives.clear();
      for (const auto& t : batch) negatives.push_back(sample_negatives(t, store, rng));

      parallel_for(n_shards, config.threads, [&](std::size_t s) {
        const std::size_t a = s * batch.size() / n_shards;
        const std::size_t z = (s + 1) * batch.size() / n_shards;
        shards[s].grad.clear();
        shards[s].loss = 0.0;
        shards[s].active = 0;
        detail::accumulate_shard(model, batch.subspan(a, z - a),
                                 std::span<const std::pair<Triple, Triple>>(negatives).subspan(a, z - a),
                                 config.margin, shards[s]);
      });
      total.clear();
      for (auto& s : shards) {
        total.add(s.grad);
        loss_sum += s.loss;
        stats.active_pairs += s.active;
      }
      adagrad_step(model, total, *state, config.learning_rate, config.l2);
      for (auto e : total.entities.touched()) {
        if (!normalize_row(model.entity(e))) randomize_unit_row(model.entity(e), rng);
      }
    }
    stats.mean_loss = loss_sum / static_cast<double>(2 * n);
    if (hook) stats.valid_mrr = hook(model, *state, epoch);
    history.epochs.push_back(stats);
  }
  return history;
}

}  // namespace embedrule
