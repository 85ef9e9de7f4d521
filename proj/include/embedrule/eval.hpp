#pragma once
// Link-prediction evaluation: entity ranking (raw and filtered), MRR,
// HITS@10, per-category breakdown and type-checked MAP.

#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "embedrule/kb.hpp"
#include "embedrule/model.hpp"
#include "embedrule/parallel.hpp"

namespace embedrule {

enum class RankMode : std::uint8_t { Raw, Filtered };

inline std::string_view to_string(RankMode m) { return m == RankMode::Raw ? "raw" : "filtered"; }

// Anything that can score every entity placed in the open slot of a query.
template <class S>
concept CandidateScorer = requires(const S& s, const Triple& t, Slot slot, std::span<double> out) {
  { s.num_entities() } -> std::convertible_to<std::size_t>;
  s.score_candidates(t, slot, out);
};

class ModelScorer {
 public:
  explicit ModelScorer(const Model& model) : model_(&model), projected_(model.entity_table().size()) {
    const std::size_t d = model.dim();
    for (EntityId e = 0; e < model.num_entities(); ++e) {
      project_into(model, e, std::span<double>(projected_).subspan(std::size_t{e} * d, d));
    }
  }

  std::size_t num_entities() const { return model_->num_entities(); }

  void score_candidates(const Triple& t, Slot open, std::span<double> out) const {
    const EntityId fixed = open == Slot::Object ? t.subject : t.object;
    CandidateForm form(*model_, t.relation, row(fixed), open);
    for (EntityId c = 0; c < num_entities(); ++c) out[c] = form(row(c));
  }

 private:
  std::span<const double> row(EntityId e) const {
    return std::span<const double>(projected_).subspan(std::size_t{e} * model_->dim(), model_->dim());
  }

  const Model* model_;
  std::vector<double> projected_;
};

// Known true completions of (s, r, ?) and (?, r, o) over train, valid and
// test, used to filter rankings and to define MAP relevance.
class FilterIndex {
 public:
  explicit FilterIndex(const TripleStore& store) : n_rel_(store.num_relations()) {
    for (auto s : {Split::Train, Split::Valid, Split::Test}) {
      for (const auto& t : store.split(s)) {
        objects_[pair_key(t.subject, t.relation)].push_back(t.object);
        subjects_[pair_key(t.object, t.relation)].push_back(t.subject);
      }
    }
    for (auto* m : {&objects_, &subjects_}) {
      for (auto& [k, v] : *m) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      }
    }
  }

  // Entities that complete the open slot of `t` into a known triple.
  std::span<const EntityId> known(const Triple& t, Slot open) const {
    const auto& m = open == Slot::Object ? objects_ : subjects_;
    const EntityId fixed = open == Slot::Object ? t.subject : t.object;
    auto it = m.find(pair_key(fixed, t.relation));
    if (it == m.end()) return {};
    return it->second;
  }

 private:
  std::uint64_t pair_key(EntityId e, RelationId r) const { return std::uint64_t{e} * n_rel_ + r; }

  std::size_t n_rel_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> objects_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> subjects_;
};

struct RankResult {
  Triple triple;
  Slot slot = Slot::Object;
  std::size_t raw_rank = 1;
  std::size_t filtered_rank = 1;

  std::size_t rank(RankMode m) const { return m == RankMode::Raw ? raw_rank : filtered_rank; }
};

inline EntityId truth_of(const Triple& t, Slot slot) { return slot == Slot::Object ? t.object : t.subject; }

// Ties are pessimistic: every other candidate scoring >= the true entity is
// ranked ahead of it. Filtering removes the other known completions.
inline RankResult rank_from_scores(const Triple& t, Slot slot, std::span<const double> scores,
                                   std::span<const EntityId> known) {
  const EntityId truth = truth_of(t, slot);
  const double target = scores[truth];
  std::size_t ahead = 0;
  for (EntityId c = 0; c < scores.size(); ++c) {
    if (c != truth && scores[c] >= target) ++ahead;
  }
  std::size_t filtered_out = 0;
  for (EntityId c : known) {
    if (c != truth && scores[c] >= target) ++filtered_out;
  }
  return {t, slot, 1 + ahead, 1 + ahead - filtered_out};
}

template <CandidateScorer S>
RankResult rank_entity(const S& scorer, const Triple& t, Slot slot, const FilterIndex& filter) {
  std::vector<double> scores(scorer.num_entities());
  scorer.score_candidates(t, slot, scores);
  return rank_from_scores(t, slot, scores, filter.known(t, slot));
}

// Ranks both slots of every query. Output order: query i subject at 2i,
// object at 2i + 1, independent of the thread count.
template <CandidateScorer S>
std::vector<RankResult> rank_queries(const S& scorer, std::span<const Triple> queries, const FilterIndex& filter,
                                     std::size_t threads = 1) {
  std::vector<RankResult> out(2 * queries.size());
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(queries.size(), threads * 8));
  parallel_for(chunks, threads, [&](std::size_t c) {
    std::vector<double> scores(scorer.num_entities());
    const std::size_t lo = c * queries.size() / chunks;
    const std::size_t hi = (c + 1) * queries.size() / chunks;
    for (std::size_t i = lo; i < hi; ++i) {
      for (auto slot : {Slot::Subject, Slot::Object}) {
        scorer.score_candidates(queries[i], slot, scores);
        out[2 * i + static_cast<std::size_t>(slot)] =
            rank_from_scores(queries[i], slot, scores, filter.known(queries[i], slot));
      }
    }
  });
  return out;
}

struct CategoryCell {
  std::size_t queries = 0;
  std::size_t hits = 0;  // rank <= 10

  double hits_at_10() const { return queries == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / queries; }
};

struct MapReport {
  double map = 0.0;
  std::size_t queries = 0;
  std::size_t skipped = 0;  // true entity outside the relation's observed domain
};

struct EvalReport {
  RankMode mode = RankMode::Filtered;
  std::size_t queries = 0;
  double mrr = 0.0;
  double hits_at_10 = 0.0;  // percent
  // [category][slot], slot 0 = predicting subjects, 1 = predicting objects.
  std::array<std::array<CategoryCell, 2>, 4> categories{};
  std::size_t uncategorized = 0;
  std::optional<MapReport> map;
};

inline constexpr std::size_t kHitsCutoff = 10;

inline EvalReport summarize(std::span<const RankResult> ranks, RankMode mode,
                            std::span<const std::optional<RelationCategory>> categories) {
  EvalReport rep;
  rep.mode = mode;
  rep.queries = ranks.size();
  double rr = 0.0;
  std::size_t hits = 0;
  for (const auto& r : ranks) {
    const std::size_t rank = r.rank(mode);
    rr += 1.0 / static_cast<double>(rank);
    const bool hit = rank <= kHitsCutoff;
    hits += hit;
    const auto rel = r.triple.relation;
    if (rel < categories.size() && categories[rel]) {
      auto& cell = rep.categories[static_cast<int>(*categories[rel])][static_cast<int>(r.slot)];
      ++cell.queries;
      cell.hits += hit;
    } else {
      ++rep.uncategorized;
    }
  }
  if (!ranks.empty()) {
    rep.mrr = rr / static_cast<double>(ranks.size());
    rep.hits_at_10 = 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
  }
  return rep;
}

struct EvalOptions {
  RankMode mode = RankMode::Filtered;
  double category_threshold = 1.5;
  std::size_t threads = 1;
};

template <CandidateScorer S>
EvalReport evaluate(const S& scorer, const TripleStore& store, std::span<const Triple> queries,
                    const EvalOptions& opt = {}) {
  FilterIndex filter(store);
  auto ranks = rank_queries(scorer, queries, filter, opt.threads);
  auto cats = classify_relations(store, opt.category_threshold);
  return summarize(ranks, opt.mode, cats);
}

inline EvalReport evaluate(const Model& model, const TripleStore& store, const EvalOptions& opt = {}) {
  if (store.test().empty()) throw Error("test split is empty");
  return evaluate(ModelScorer(model), store, store.test(), opt);
}

// Average precision of one ranked query; `candidate_scores` includes the
// relevant items. Ties are resolved against the relevant items: inside a
// group of equal scores every non-relevant candidate is ranked first.
inline double average_precision(std::span<const double> candidate_scores, std::span<const double> relevant_scores) {
  if (relevant_scores.empty()) return 0.0;
  std::vector<double> cand(candidate_scores.begin(), candidate_scores.end());
  std::vector<double> rel(relevant_scores.begin(), relevant_scores.end());
  std::sort(cand.begin(), cand.end(), std::greater<>());
  std::sort(rel.begin(), rel.end(), std::greater<>());
  double sum = 0.0;
  std::size_t i = 0;
  while (i < rel.size()) {
    const double v = rel[i];
    std::size_t j = i;
    while (j < rel.size() && rel[j] == v) ++j;
    // Positions 1-based: everything scoring >= v except the tied relevant
    // items comes first.
    const auto at_or_above = static_cast<std::size_t>(
        std::upper_bound(cand.begin(), cand.end(), v, std::greater<>()) - cand.begin());
    const std::size_t before = at_or_above - (j - i);
    for (std::size_t k = 1; k <= j - i; ++k) {
      sum += static_cast<double>(i + k) / static_cast<double>(before + k);
    }
    i = j;
  }
  return sum / static_cast<double>(rel.size());
}

// MAP with candidates restricted to the relation's observed subject (or
// object) domain; relevant = known true completions inside that domain.
template <CandidateScorer S>
MapReport map_type_checked(const S& scorer, const TripleStore& store, const RelationDomains& domains,
                           std::span<const Triple> queries, std::size_t threads = 1) {
  FilterIndex filter(store);
  std::vector<std::optional<double>> ap(2 * queries.size());
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(queries.size(), threads * 8));
  parallel_for(chunks, threads, [&](std::size_t c) {
    std::vector<double> scores(scorer.num_entities());
    std::vector<double> cand, rel;
    const std::size_t lo = c * queries.size() / chunks;
    const std::size_t hi = (c + 1) * queries.size() / chunks;
    for (std::size_t i = lo; i < hi; ++i) {
      const Triple& t = queries[i];
      for (auto slot : {Slot::Subject, Slot::Object}) {
        if (!domains.has(t.relation)) continue;
        const auto& dom = slot == Slot::Subject ? domains.subjects[t.relation] : domains.objects[t.relation];
        if (!std::binary_search(dom.begin(), dom.end(), truth_of(t, slot))) continue;
        scorer.score_candidates(t, slot, scores);
        cand.clear();
        rel.clear();
        for (EntityId e : dom) cand.push_back(scores[e]);
        for (EntityId e : filter.known(t, slot)) {
          if (std::binary_search(dom.begin(), dom.end(), e)) rel.push_back(scores[e]);
        }
        ap[2 * i + static_cast<std::size_t>(slot)] = average_precision(cand, rel);
      }
    }
  });
  MapReport rep;
  double sum = 0.0;
  for (const auto& a : ap) {
    if (a) {
      sum += *a;
      ++rep.queries;
    } else {
      ++rep.skipped;
    }
  }
  if (rep.queries > 0) rep.map = sum / static_cast<double>(rep.queries);
  return rep;
}

inline void write_report_csv(std::ostream& out, const EvalReport& r) {
  out << "metric,value\n";
  out << "mode," << to_string(r.mode) << '\n';
  out << "queries," << r.queries << '\n';
  out << fmt::format("mrr,{:.17g}\n", r.mrr);
  out << fmt::format("hits@10,{:.17g}\n", r.hits_at_10);
  if (r.map) {
    out << fmt::format("map,{:.17g}\n", r.map->map);
    out << "map_queries," << r.map->queries << '\n';
    out << "map_skipped," << r.map->skipped << '\n';
  }
}

// Two rows (predicting subjects / objects) by four relation categories.
inline void write_category_table(std::ostream& out, const EvalReport& r) {
  out << "slot";
  for (auto name : kCategoryNames) out << ',' << name;
  out << '\n';
  for (int slot = 0; slot < 2; ++slot) {
    out << (slot == 0 ? "subject" : "object");
    for (int c = 0; c < 4; ++c) out << fmt::format(",{:.17g}", r.categories[c][slot].hits_at_10());
    out << '\n';
  }
  out << "count_subject";
  for (int c = 0; c < 4; ++c) out << ',' << r.categories[c][0].queries;
  out << "\ncount_object";
  for (int c = 0; c < 4; ++c) out << ',' << r.categories[c][1].queries;
  out << '\n';
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["mode"] = to_string(r.mode);
  j["queries"] = r.queries;
  j["mrr"] = r.mrr;
  j["hits_at_10"] = r.hits_at_10;
  j["uncategorized"] = r.uncategorized;
  for (int c = 0; c < 4; ++c) {
    for (int slot = 0; slot < 2; ++slot) {
      const auto& cell = r.categories[c][slot];
      j["categories"][std::string(kCategoryNames[c])][slot == 0 ? "subject" : "object"] = {
          {"queries", cell.queries}, {"hits_at_10", cell.hits_at_10()}};
    }
  }
  if (r.map) j["map"] = {{"map", r.map->map}, {"queries", r.map->queries}, {"skipped", r.map->skipped}};
  return j;
}

}  // namespace embedrule
