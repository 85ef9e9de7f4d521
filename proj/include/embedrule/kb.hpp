#pragma once
// Knowledge-base ingestion: vocabularies, triple splits, and per-relation
// metadata (argument domains, cardinality categories).
//
// Triple files are UTF-8 with one "subject\trelation\tobject" fact per line.
// Ids are dense and assigned in first-appearance order across train, valid,
// test, so ingesting the same files twice always yields the same ids.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "embedrule/errors.hpp"
#include "embedrule/io.hpp"

namespace embedrule {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId subject = 0;
  RelationId relation = 0;
  EntityId object = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Dense token <-> id table. lookup(name(i)) == i for every id.
class TokenTable {
 public:
  std::uint32_t add(std::string_view token) {
    auto it = index_.find(std::string(token));
    if (it != index_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(token);
    index_.emplace(names_.back(), id);
    return id;
  }

  std::optional<std::uint32_t> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::uint32_t lookup(std::string_view token) const {
    if (auto id = find(token)) return *id;
    throw LookupError(std::string(token));
  }

  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

  friend bool operator==(const TokenTable& a, const TokenTable& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct Vocabulary {
  TokenTable entities;
  TokenTable relations;

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;
};

enum class VocabMode { Grow, Fixed };

struct LoadedSplit {
  std::vector<Triple> triples;
  std::size_t duplicates = 0;  // repeated lines dropped from this file
};

// Parses one triple file. Under VocabMode::Fixed an unseen token raises
// LookupError; otherwise new tokens extend the vocabulary.
inline LoadedSplit parse_triples(std::istream& in, const std::string& source, Vocabulary& vocab,
                                 VocabMode mode = VocabMode::Grow) {
  LoadedSplit out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (std::count(line.begin(), line.end(), '\t') != 2) {
      throw ParseError(source, line_no, "expected 3 tab-separated fields");
    }
    std::string_view view(line);
    const auto t1 = view.find('\t');
    const auto t2 = view.find('\t', t1 + 1);
    const std::array<std::string_view, 3> fields = {view.substr(0, t1), view.substr(t1 + 1, t2 - t1 - 1),
                                                    view.substr(t2 + 1)};
    for (auto f : fields) {
      if (f.empty()) throw ParseError(source, line_no, "empty field");
    }
    Triple t;
    if (mode == VocabMode::Fixed) {
      t = {vocab.entities.lookup(fields[0]), vocab.relations.lookup(fields[1]),
           vocab.entities.lookup(fields[2])};
    } else {
      t.subject = vocab.entities.add(fields[0]);
      t.relation = vocab.relations.add(fields[1]);
      t.object = vocab.entities.add(fields[2]);
    }
    out.triples.push_back(t);
  }
  // Drop repeated facts, keeping the first occurrence.
  std::vector<std::size_t> order(out.triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.triples[a] < out.triples[b]; });
  std::vector<char> keep(out.triples.size(), 1);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (out.triples[order[i]] == out.triples[order[i - 1]]) keep[order[i]] = 0;
  }
  std::vector<Triple> unique;
  unique.reserve(out.triples.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) unique.push_back(out.triples[i]);
  }
  out.duplicates = out.triples.size() - unique.size();
  out.triples = std::move(unique);
  return out;
}

inline LoadedSplit load_triples(const fs::path& path, Vocabulary& vocab,
                                VocabMode mode = VocabMode::Grow) {
  auto in = open_input(path);
  return parse_triples(in, path.string(), vocab, mode);
}

inline void write_triples(std::ostream& out, std::span<const Triple> triples, const Vocabulary& vocab) {
  for (const auto& t : triples) {
    out << vocab.entities.name(t.subject) << '\t' << vocab.relations.name(t.relation) << '\t'
        << vocab.entities.name(t.object) << '\n';
  }
}

inline void save_triples(const fs::path& path, std::span<const Triple> triples, const Vocabulary& vocab) {
  write_file_atomic(path, [&](std::ostream& out) { write_triples(out, triples, vocab); });
}

// One token per line; line number (0-based) is the id.
inline void save_tokens(const fs::path& path, const TokenTable& table) {
  write_file_atomic(path, [&](std::ostream& out) {
    for (const auto& name : table.names()) out << name << '\n';
  });
}

enum class Split : std::uint8_t { Train = 1, Valid = 2, Test = 4 };

// Immutable container for the three splits plus a membership index over
// their union. Safe for concurrent reads.
class TripleStore {
 public:
  TripleStore() = default;

  TripleStore(Vocabulary vocab, std::vector<Triple> train, std::vector<Triple> valid,
              std::vector<Triple> test, std::vector<std::optional<RelationId>> inverse_of = {})
      : vocab_(std::move(vocab)),
        train_(std::move(train)),
        valid_(std::move(valid)),
        test_(std::move(test)),
        inverse_of_(std::move(inverse_of)) {
    inverse_of_.resize(vocab_.relations.size());
    index(train_, Split::Train);
    index(valid_, Split::Valid);
    index(test_, Split::Test);
  }

  const Vocabulary& vocab() const { return vocab_; }
  std::size_t num_entities() const { return vocab_.entities.size(); }
  std::size_t num_relations() const { return vocab_.relations.size(); }

  const std::vector<Triple>& train() const { return train_; }
  const std::vector<Triple>& valid() const { return valid_; }
  const std::vector<Triple>& test() const { return test_; }
  const std::vector<Triple>& split(Split s) const {
    switch (s) {
      case Split::Train: return train_;
      case Split::Valid: return valid_;
      default: return test_;
    }
  }

  // Number of triples stored in more than one split (reported, not an error).
  std::size_t cross_split_duplicates() const { return cross_split_; }

  bool contains(const Triple& t) const { return mask(t) != 0; }
  bool in_split(const Triple& t, Split s) const { return (mask(t) & static_cast<std::uint8_t>(s)) != 0; }
  bool in_train(const Triple& t) const { return in_split(t, Split::Train); }

  std::optional<RelationId> inverse_of(RelationId r) const { return inverse_of_.at(r); }
  const std::vector<std::optional<RelationId>>& inverse_pairs() const { return inverse_of_; }

  std::uint64_t key(const Triple& t) const {
    return (static_cast<std::uint64_t>(t.subject) * num_relations() + t.relation) * num_entities() + t.object;
  }

  bool valid_ids(const Triple& t) const {
    return t.subject < num_entities() && t.object < num_entities() && t.relation < num_relations();
  }

 private:
  std::uint8_t mask(const Triple& t) const {
    if (!valid_ids(t)) return 0;
    auto it = membership_.find(key(t));
    return it == membership_.end() ? 0 : it->second;
  }

  void index(const std::vector<Triple>& triples, Split s) {
    for (const auto& t : triples) {
      if (!valid_ids(t)) throw Error("triple id out of vocabulary bounds");
      auto& m = membership_[key(t)];
      if (m != 0 && (m & static_cast<std::uint8_t>(s)) == 0) ++cross_split_;
      if (m & static_cast<std::uint8_t>(s)) throw Error("duplicate triple within a split");
      m |= static_cast<std::uint8_t>(s);
    }
  }

  Vocabulary vocab_;
  std::vector<Triple> train_, valid_, test_;
  std::vector<std::optional<RelationId>> inverse_of_;
  std::unordered_map<std::uint64_t, std::uint8_t> membership_;
  std::size_t cross_split_ = 0;
};

inline constexpr std::string_view kInverseSuffix = "^-1";

// Re-derives inverse pairing from relation names ("r" and "r^-1"), used when
// reading data previously written by augment_inverses.
inline std::vector<std::optional<RelationId>> inverse_pairs_by_name(const TokenTable& relations) {
  std::vector<std::optional<RelationId>> pairs(relations.size());
  for (RelationId r = 0; r < relations.size(); ++r) {
    const auto& name = relations.name(r);
    if (name.size() <= kInverseSuffix.size() || !name.ends_with(kInverseSuffix)) continue;
    if (auto base = relations.find(std::string_view(name).substr(0, name.size() - kInverseSuffix.size()))) {
      pairs[r] = *base;
      pairs[*base] = r;
    }
  }
  return pairs;
}

struct StoreLoadReport {
  std::size_t duplicates = 0;
  std::size_t cross_split = 0;
};

// Loads train, valid and test (in that order) into one vocabulary.
inline TripleStore load_store(const fs::path& train, const fs::path& valid, const fs::path& test,
                              StoreLoadReport* report = nullptr) {
  Vocabulary vocab;
  auto tr = load_triples(train, vocab);
  auto va = load_triples(valid, vocab);
  auto te = load_triples(test, vocab);
  auto pairs = inverse_pairs_by_name(vocab.relations);
  TripleStore store(std::move(vocab), std::move(tr.triples), std::move(va.triples), std::move(te.triples),
                    std::move(pairs));
  if (report) {
    report->duplicates = tr.duplicates + va.duplicates + te.duplicates;
    report->cross_split = store.cross_split_duplicates();
  }
  return store;
}

namespace detail {

// Rebuilds a store keeping only triples whose relation passes `keep`, with
// ids re-assigned in first-appearance order.
template <class Keep>
TripleStore compact_store(const TripleStore& store, Keep keep) {
  Vocabulary vocab;
  const auto& old = store.vocab();
  auto remap = [&](const std::vector<Triple>& src) {
    std::vector<Triple> dst;
    for (const auto& t : src) {
      if (!keep(t.relation)) continue;
      Triple n;
      n.subject = vocab.entities.add(old.entities.name(t.subject));
      n.relation = vocab.relations.add(old.relations.name(t.relation));
      n.object = vocab.entities.add(old.entities.name(t.object));
      dst.push_back(n);
    }
    return dst;
  };
  auto train = remap(store.train());
  auto valid = remap(store.valid());
  auto test = remap(store.test());
  std::vector<std::optional<RelationId>> pairs(vocab.relations.size());
  for (RelationId r = 0; r < vocab.relations.size(); ++r) {
    auto old_r = old.relations.lookup(vocab.relations.name(r));
    if (auto inv = store.inverse_of(old_r)) {
      if (auto mapped = vocab.relations.find(old.relations.name(*inv))) pairs[r] = *mapped;
    }
  }
  return TripleStore(std::move(vocab), std::move(train), std::move(valid), std::move(test), std::move(pairs));
}

}  // namespace detail

// Keeps relations with at least `min_count` training triples, in every split.
inline TripleStore filter_frequent_relations(const TripleStore& store, std::size_t min_count) {
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  if (min_count == 1) return store;  // no filtering, ids untouched
  std::vector<std::size_t> counts(store.num_relations(), 0);
  for (const auto& t : store.train()) ++counts[t.relation];
  auto out = detail::compact_store(store, [&](RelationId r) { return counts[r] >= min_count; });
  if (out.train().empty()) throw Error("no relation has at least " + std::to_string(min_count) + " training triples");
  return out;
}

// Drops the listed relations from every split (explicit exclusion list for
// equivalence-like relations).
inline TripleStore exclude_relations(const TripleStore& store, std::span<const RelationId> excluded) {
  std::vector<char> drop(store.num_relations(), 0);
  for (auto r : excluded) drop.at(r) = 1;
  return detail::compact_store(store, [&](RelationId r) { return !drop[r]; });
}

// Adds r^-1 with every reversed training triple for each relation that has
// no inverse yet. Idempotent.
inline TripleStore augment_inverses(const TripleStore& store) {
  Vocabulary vocab = store.vocab();
  auto pairs = store.inverse_pairs();
  const std::size_t n_rel = store.num_relations();
  std::vector<std::optional<RelationId>> added(n_rel);
  for (RelationId r = 0; r < n_rel; ++r) {
    if (pairs[r]) continue;
    std::string name = vocab.relations.name(r) + std::string(kInverseSuffix);
    if (vocab.relations.find(name)) throw Error("relation '" + name + "' already exists");
    auto inv = vocab.relations.add(name);
    added[r] = inv;
  }
  pairs.resize(vocab.relations.size());
  for (RelationId r = 0; r < n_rel; ++r) {
    if (added[r]) {
      pairs[r] = *added[r];
      pairs[*added[r]] = r;
    }
  }
  auto train = store.train();
  for (const auto& t : store.train()) {
    if (added[t.relation]) train.push_back({t.object, *added[t.relation], t.subject});
  }
  return TripleStore(std::move(vocab), std::move(train), store.valid(), store.test(), std::move(pairs));
}

// Observed argument domains per relation, from training triples only.
struct RelationDomains {
  std::size_t num_entities = 0;
  std::vector<std::vector<EntityId>> subjects;  // sorted, unique
  std::vector<std::vector<EntityId>> objects;   // sorted, unique

  bool has(RelationId r) const { return r < subjects.size() && !subjects[r].empty(); }
  std::size_t num_relations() const { return subjects.size(); }
  bool subject_in_domain(RelationId r, EntityId e) const {
    return std::binary_search(subjects[r].begin(), subjects[r].end(), e);
  }
  bool object_in_domain(RelationId r, EntityId e) const {
    return std::binary_search(objects[r].begin(), objects[r].end(), e);
  }
};

inline RelationDomains compute_domains(const TripleStore& store) {
  RelationDomains d;
  d.num_entities = store.num_entities();
  d.subjects.resize(store.num_relations());
  d.objects.resize(store.num_relations());
  for (const auto& t : store.train()) {
    d.subjects[t.relation].push_back(t.subject);
    d.objects[t.relation].push_back(t.object);
  }
  for (auto* sets : {&d.subjects, &d.objects}) {
    for (auto& s : *sets) {
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
    }
  }
  return d;
}

// Relations whose subject or object domain holds a single entity.
inline std::vector<RelationId> singleton_domain_relations(const RelationDomains& d) {
  std::vector<RelationId> out;
  for (RelationId r = 0; r < d.num_relations(); ++r) {
    if (d.has(r) && (d.subjects[r].size() == 1 || d.objects[r].size() == 1)) out.push_back(r);
  }
  return out;
}

enum class RelationCategory : std::uint8_t { OneToOne = 0, OneToMany = 1, ManyToOne = 2, ManyToMany = 3 };

inline constexpr std::array<std::string_view, 4> kCategoryNames = {"1-to-1", "1-to-n", "n-to-1", "n-to-n"};

inline std::string_view category_name(RelationCategory c) { return kCategoryNames[static_cast<int>(c)]; }

inline RelationCategory categorize(double objects_per_subject, double subjects_per_object, double threshold) {
  const bool many_objects = objects_per_subject >= threshold;
  const bool many_subjects = subjects_per_object >= threshold;
  if (!many_objects && !many_subjects) return RelationCategory::OneToOne;
  if (many_objects && !many_subjects) return RelationCategory::OneToMany;
  if (!many_objects) return RelationCategory::ManyToOne;
  return RelationCategory::ManyToMany;
}

// Relations without training triples have no category (nullopt).
inline std::vector<std::optional<RelationCategory>> classify_relations(const TripleStore& store,
                                                                       double threshold = 1.5) {
  auto domains = compute_domains(store);
  std::vector<std::size_t> counts(store.num_relations(), 0);
  for (const auto& t : store.train()) ++counts[t.relation];
  std::vector<std::optional<RelationCategory>> out(store.num_relations());
  for (RelationId r = 0; r < store.num_relations(); ++r) {
    if (counts[r] == 0) continue;
    const double n = static_cast<double>(counts[r]);
    out[r] = categorize(n / static_cast<double>(domains.subjects[r].size()),
                        n / static_cast<double>(domains.objects[r].size()), threshold);
  }
  return out;
}

}  // namespace embedrule
