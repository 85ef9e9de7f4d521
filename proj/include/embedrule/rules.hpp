#pragma once
// Closed-path Horn rule mining from relation embeddings.
//
// For each head relation r, body sequences p1..pn are enumerated under the
// argument-domain constraints (X_p1 meets X_r, Y_pn meets Y_r, Y_pi meets
// X_p(i+1)), ranked by the distance between r's embedding and the composed
// body embedding, cut to the K nearest, filtered by a global threshold delta
// and then by the largest-gap heuristic. Surviving rules are instantiated on
// the training triples and ranked by confidence.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <fmt/format.h>

#include "embedrule/errors.hpp"
#include "embedrule/kb.hpp"
#include "embedrule/model.hpp"
#include "embedrule/parallel.hpp"

namespace embedrule {

using RelationSequence = std::vector<RelationId>;

inline constexpr std::size_t kDefaultNeighbors = 100;

// Thresholds tuned per embedding family for length-2 and length-3 rules.
// DistMult with tanh projection takes the values used for the tanh +
// pre-trained-vector variant.
inline std::optional<double> default_delta(ModelKind kind, Projection projection, std::size_t length) {
  const bool short_rule = length == 2;
  if (length != 2 && length != 3) return std::nullopt;
  switch (kind) {
    case ModelKind::DistMult:
      if (projection == Projection::Tanh) return short_rule ? 9.2 : 9.1;
      return short_rule ? 36.3 : 48.8;
    case ModelKind::Bilinear: return short_rule ? 1.9 : 2.9;
    case ModelKind::TransE: return short_rule ? 3.4 : 1.1;
    default: return std::nullopt;
  }
}

// Bitset view of argument domains plus precomputed chaining adjacency, so
// sequence enumeration is an indexed walk rather than a scan over all
// relation tuples.
class SequenceIndex {
 public:
  explicit SequenceIndex(const RelationDomains& domains, std::span<const RelationId> excluded = {},
                         std::span<const std::optional<RelationId>> inverse_of = {})
      : n_rel_(domains.num_relations()), words_((domains.num_entities + 63) / 64) {
    usable_.assign(n_rel_, 0);
    for (RelationId r = 0; r < n_rel_; ++r) usable_[r] = domains.has(r);
    for (auto r : excluded) {
      if (r < n_rel_) usable_[r] = 0;
    }
    subj_.assign(n_rel_ * words_, 0);
    obj_.assign(n_rel_ * words_, 0);
    for (RelationId r = 0; r < n_rel_; ++r) {
      for (auto e : domains.subjects[r]) subj_[r * words_ + e / 64] |= std::uint64_t{1} << (e % 64);
      for (auto e : domains.objects[r]) obj_[r * words_ + e / 64] |= std::uint64_t{1} << (e % 64);
    }
    inverse_.assign(inverse_of.begin(), inverse_of.end());
    inverse_.resize(n_rel_);
    chain_.resize(n_rel_);
    for (RelationId p = 0; p < n_rel_; ++p) {
      if (!usable_[p]) continue;
      for (RelationId q = 0; q < n_rel_; ++q) {
        if (q == p || !usable_[q] || inverse_[p] == q) continue;
        if (meets(obj_, p, subj_, q)) chain_[p].push_back(q);
      }
    }
  }

  std::size_t num_relations() const { return n_rel_; }
  bool usable(RelationId r) const { return r < n_rel_ && usable_[r]; }
  const std::vector<RelationId>& successors(RelationId p) const { return chain_[p]; }

  // All bodies of `length` (2 or 3) admissible for `head`, in lexicographic order.
  std::vector<RelationSequence> enumerate(RelationId head, std::size_t length) const {
    if (length != 2 && length != 3) throw Error("rule length must be 2 or 3");
    std::vector<RelationSequence> out;
    if (!usable(head)) return out;
    std::vector<char> start(n_rel_, 0), end(n_rel_, 0);
    for (RelationId p = 0; p < n_rel_; ++p) {
      if (!usable_[p] || p == head) continue;
      start[p] = meets(subj_, p, subj_, head);
      end[p] = meets(obj_, p, obj_, head);
    }
    for (RelationId p = 0; p < n_rel_; ++p) {
      if (!start[p]) continue;
      for (RelationId q : chain_[p]) {
        if (q == head) continue;
        if (length == 2) {
          if (end[q]) out.push_back({p, q});
          continue;
        }
        for (RelationId t : chain_[q]) {
          if (t == head || t == p || !end[t]) continue;
          out.push_back({p, q, t});
        }
      }
    }
    return out;
  }

 private:
  bool meets(const std::vector<std::uint64_t>& a, RelationId ra, const std::vector<std::uint64_t>& b,
             RelationId rb) const {
    const std::uint64_t* x = a.data() + ra * words_;
    const std::uint64_t* y = b.data() + rb * words_;
    for (std::size_t w = 0; w < words_; ++w) {
      if (x[w] & y[w]) return true;
    }
    return false;
  }

  std::size_t n_rel_;
  std::size_t words_;
  std::vector<char> usable_;
  std::vector<std::uint64_t> subj_, obj_;
  std::vector<std::optional<RelationId>> inverse_;
  std::vector<std::vector<RelationId>> chain_;
};

inline std::vector<RelationSequence> enumerate_sequences(const RelationDomains& domains, RelationId head,
                                                         std::size_t length) {
  return SequenceIndex(domains).enumerate(head, length);
}

// Largest-gap cut over ascending distances: returns j maximizing
// d[j] - d[j-1] (1-based), i.e. keep the first j items. Ties pick the
// smallest j; a single element yields 1.
inline std::size_t gap_cutoff(std::span<const double> ascending) {
  if (ascending.empty()) throw Error("gap_cutoff needs at least one distance");
  std::size_t best = 1;
  double best_gap = -1.0;
  for (std::size_t i = 0; i + 1 < ascending.size(); ++i) {
    const double gap = ascending[i + 1] - ascending[i];
    if (gap > best_gap) {
      best_gap = gap;
      best = i + 1;
    }
  }
  return best;
}

struct ScoredSequence {
  RelationSequence body;
  double distance = 0.0;
};

// Bodies for `head` sorted by increasing embedding distance (ties by body).
inline std::vector<ScoredSequence> rank_sequences(const Model& model, const SequenceIndex& index, RelationId head,
                                                  std::size_t length) {
  auto target = relation_embedding(model, head);
  std::vector<ScoredSequence> out;
  for (auto& body : index.enumerate(head, length)) {
    const double d = relation_distance(target, compose_relations(model, body));
    out.push_back({std::move(body), d});
  }
  std::sort(out.begin(), out.end(), [](const ScoredSequence& a, const ScoredSequence& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.body < b.body;
  });
  return out;
}

struct Rule {
  RelationId head = 0;
  RelationSequence body;
};

struct RuleCandidate {
  Rule rule;
  double distance = 0.0;
  std::size_t support = 0;  // distinct predictions already in train
  std::size_t n_predictions = 0;
  double confidence = 0.0;
};

struct Prediction {
  Triple triple;
  std::vector<EntityId> path;  // first witnessing path a1 .. a(n+1)
};

// Training adjacency: objects of (subject, relation), plus per-relation edge
// lists in training order.
class PathIndex {
 public:
  explicit PathIndex(const TripleStore& store) : n_rel_(store.num_relations()), edges_(store.num_relations()) {
    for (const auto& t : store.train()) {
      out_[key(t.subject, t.relation)].push_back(t.object);
      edges_[t.relation].push_back(t);
    }
  }

  std::span<const EntityId> objects(EntityId s, RelationId r) const {
    auto it = out_.find(key(s, r));
    if (it == out_.end()) return {};
    return it->second;
  }
  std::span<const Triple> edges(RelationId r) const { return edges_.at(r); }

 private:
  std::uint64_t key(EntityId e, RelationId r) const { return std::uint64_t{e} * n_rel_ + r; }

  std::size_t n_rel_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> out_;
  std::vector<std::vector<Triple>> edges_;
};

// Calls fn(path) once per distinct endpoint pair (path[0], path.back()) for
// every entity path along `body` in the training graph; the first path found
// for a pair is the one reported.
template <class Fn>
void for_each_instantiation(const PathIndex& index, std::span<const RelationId> body, Fn&& fn) {
  std::unordered_set<std::uint64_t> seen;
  std::vector<EntityId> path(body.size() + 1);
  auto walk = [&](auto&& self, std::size_t depth) -> void {
    if (depth == body.size()) {
      const std::uint64_t k = (std::uint64_t{path.front()} << 32) | path.back();
      if (seen.insert(k).second) fn(std::span<const EntityId>(path));
      return;
    }
    for (EntityId next : index.objects(path[depth], body[depth])) {
      path[depth + 1] = next;
      self(self, depth + 1);
    }
  };
  if (body.empty()) return;
  for (const auto& t : index.edges(body[0])) {
    path[0] = t.subject;
    path[1] = t.object;
    walk(walk, 1);
  }
}

inline std::vector<Prediction> instantiate_rule(const Rule& rule, const PathIndex& index) {
  std::vector<Prediction> out;
  for_each_instantiation(index, rule.body, [&](std::span<const EntityId> path) {
    out.push_back({{path.front(), rule.head, path.back()}, {path.begin(), path.end()}});
  });
  return out;
}

inline std::vector<Prediction> instantiate_rule(const Rule& rule, const TripleStore& store) {
  return instantiate_rule(rule, PathIndex(store));
}

struct RuleCounts {
  std::size_t predictions = 0;
  std::size_t correct = 0;  // predictions present in train
};

inline RuleCounts count_predictions(const Rule& rule, const PathIndex& index, const TripleStore& store) {
  RuleCounts c;
  for_each_instantiation(index, rule.body, [&](std::span<const EntityId> path) {
    ++c.predictions;
    c.correct += store.in_train({path.front(), rule.head, path.back()});
  });
  return c;
}

// Fraction of a rule's predictions already in train; nullopt when the rule
// makes no prediction.
inline std::optional<double> confidence(const Rule& rule, const TripleStore& store) {
  auto c = count_predictions(rule, PathIndex(store), store);
  if (c.predictions == 0) return std::nullopt;
  return static_cast<double>(c.correct) / static_cast<double>(c.predictions);
}

struct EmbedRuleOptions {
  std::size_t neighbors = kDefaultNeighbors;  // K
  std::vector<std::size_t> lengths = {2};
  // Per-length threshold; missing lengths fall back to default_delta.
  std::map<std::size_t, double> delta;
  std::vector<RelationId> excluded;
  std::size_t threads = 1;
};

namespace detail {

inline double resolve_delta(const Model& model, const EmbedRuleOptions& opt, std::size_t length) {
  if (auto it = opt.delta.find(length); it != opt.delta.end()) return it->second;
  if (auto d = default_delta(model.kind(), model.projection(), length)) return *d;
  throw CapabilityError("no default threshold for " + std::string(to_string(model.kind())));
}

}  // namespace detail

// EmbedRule: candidate rules for every head relation, sorted by decreasing
// confidence (ties keep head order, then distance).
inline std::vector<RuleCandidate> embed_rule(const Model& model, const TripleStore& store,
                                             const RelationDomains& domains, const EmbedRuleOptions& opt = {}) {
  if (!composable(model.kind())) {
    throw CapabilityError("rule mining needs TransE, DistMult or Bilinear embeddings, got " +
                          std::string(to_string(model.kind())));
  }
  if (opt.neighbors == 0) throw ConfigError("K must be at least 1");
  std::map<std::size_t, double> deltas;
  for (auto len : opt.lengths) {
    deltas[len] = detail::resolve_delta(model, opt, len);
    if (deltas[len] < 0.0) throw ConfigError("delta must be non-negative");
  }
  SequenceIndex index(domains, opt.excluded, store.inverse_pairs());
  PathIndex paths(store);
  std::vector<std::vector<RuleCandidate>> per_head(model.num_relations());
  parallel_for(model.num_relations(), opt.threads, [&](std::size_t h) {
    const auto head = static_cast<RelationId>(h);
    if (!index.usable(head)) return;
    for (auto len : opt.lengths) {
      auto ranked = rank_sequences(model, index, head, len);
      if (ranked.size() > opt.neighbors) ranked.resize(opt.neighbors);
      const double delta = deltas.at(len);
      std::erase_if(ranked, [&](const ScoredSequence& s) { return s.distance > delta; });
      if (ranked.empty()) continue;
      std::vector<double> dist;
      for (const auto& s : ranked) dist.push_back(s.distance);
      ranked.resize(gap_cutoff(dist));
      for (auto& s : ranked) {
        RuleCandidate c;
        c.rule = {head, std::move(s.body)};
        c.distance = s.distance;
        auto counts = count_predictions(c.rule, paths, store);
        if (counts.predictions == 0) continue;
        c.n_predictions = counts.predictions;
        c.support = counts.correct;
        c.confidence = static_cast<double>(counts.correct) / static_cast<double>(counts.predictions);
        per_head[h].push_back(std::move(c));
      }
    }
  });
  std::vector<RuleCandidate> out;
  for (auto& v : per_head) {
    for (auto& c : v) out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RuleCandidate& a, const RuleCandidate& b) { return a.confidence > b.confidence; });
  return out;
}

struct PrecisionPoint {
  std::size_t predictions = 0;
  double precision = 0.0;
};

// Walks rules in order, pooling their unseen predictions (not in train or
// valid). Emits (pool size, fraction of pool in test) whenever the pool
// grows; stops once the pool holds at least `cap` predictions.
inline std::vector<PrecisionPoint> precision_curve(std::span<const RuleCandidate> rules, const TripleStore& store,
                                                   const PathIndex& index, std::size_t cap = 10000,
                                                   std::vector<Triple>* pooled = nullptr) {
  std::vector<PrecisionPoint> out;
  std::unordered_set<std::uint64_t> pool;
  std::size_t hits = 0;
  for (const auto& rc : rules) {
    if (pool.size() >= cap) break;
    const std::size_t before = pool.size();
    for_each_instantiation(index, rc.rule.body, [&](std::span<const EntityId> path) {
      const Triple t{path.front(), rc.rule.head, path.back()};
      if (store.in_split(t, Split::Train) || store.in_split(t, Split::Valid)) return;
      if (!pool.insert(store.key(t)).second) return;
      hits += store.in_split(t, Split::Test);
      if (pooled) pooled->push_back(t);
    });
    if (pool.size() > before) {
      out.push_back({pool.size(), static_cast<double>(hits) / static_cast<double>(pool.size())});
    }
  }
  return out;
}

inline std::vector<PrecisionPoint> precision_curve(std::span<const RuleCandidate> rules, const TripleStore& store,
                                                   std::size_t cap = 10000) {
  return precision_curve(rules, store, PathIndex(store), cap);
}

// "B1(a,b) & B2(b,c) => H(a,c)"
inline std::string format_rule(const Rule& rule, const TokenTable& relations) {
  static constexpr char kVars[] = "abcdefgh";
  std::string s;
  for (std::size_t i = 0; i < rule.body.size(); ++i) {
    if (i) s += " & ";
    s += fmt::format("{}({},{})", relations.name(rule.body[i]), kVars[i], kVars[i + 1]);
  }
  s += fmt::format(" => {}({},{})", relations.name(rule.head), kVars[0], kVars[rule.body.size()]);
  return s;
}

inline void write_rules(std::ostream& out, std::span<const RuleCandidate> rules, const TokenTable& relations) {
  for (const auto& r : rules) {
    out << format_rule(r.rule, relations)
        << fmt::format("\t{:.17g}\t{:.17g}\t{}\n", r.distance, r.confidence, r.n_predictions);
  }
}

inline void write_precision_curve(std::ostream& out, std::span<const PrecisionPoint> points) {
  out << "predictions,precision\n";
  for (const auto& p : points) out << fmt::format("{},{:.17g}\n", p.predictions, p.precision);
}

}  // namespace embedrule
