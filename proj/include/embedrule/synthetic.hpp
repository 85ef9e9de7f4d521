#pragma once
// Synthetic knowledge bases with planted length-2 closed-path rules.
//
// Entities are split into types, each type into equal groups. A relation
// links a source type to a target type through a random group-to-group
// map: every source entity gets `degree` random targets inside the mapped
// group. A planted rule B1 & B2 => H makes H exactly the set of endpoint
// pairs of B1-B2 paths. Distractor relations are generated the same way
// with independent maps.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "embedrule/errors.hpp"
#include "embedrule/kb.hpp"
#include "embedrule/rules.hpp"

namespace embedrule {

struct SyntheticOptions {
  std::size_t types = 3;
  std::size_t entities_per_type = 100;
  std::size_t groups = 5;
  std::size_t degree = 6;
  std::size_t rules = 1;
  std::size_t distractors = 0;
  double holdout = 0.1;  // fraction of every relation's triples moved to test
  std::uint64_t seed = 1;
};

struct SyntheticKb {
  TripleStore store;
  std::vector<Rule> planted;
};

namespace detail {

struct RelationPlan {
  std::size_t src = 0, dst = 0;
  std::vector<std::size_t> group_map;
};

}  // namespace detail

inline SyntheticKb make_planted_kb(const SyntheticOptions& opt) {
  if (opt.types < 3 && opt.rules > 0) throw ConfigError("planted rules need at least 3 entity types");
  if (opt.groups == 0 || opt.entities_per_type % opt.groups != 0) {
    throw ConfigError("entities_per_type must be a positive multiple of groups");
  }
  const std::size_t group_size = opt.entities_per_type / opt.groups;
  if (opt.degree == 0 || opt.degree > group_size) throw ConfigError("degree must be in [1, group size]");

  std::mt19937_64 rng(opt.seed);
  Vocabulary vocab;
  for (std::size_t t = 0; t < opt.types; ++t) {
    for (std::size_t i = 0; i < opt.entities_per_type; ++i) vocab.entities.add("t" + std::to_string(t) + "_e" + std::to_string(i));
  }
  auto entity = [&](std::size_t type, std::size_t group, std::size_t k) {
    return static_cast<EntityId>(type * opt.entities_per_type + group * group_size + k);
  };
  auto random_map = [&] {
    std::vector<std::size_t> m(opt.groups);
    std::iota(m.begin(), m.end(), 0);
    std::shuffle(m.begin(), m.end(), rng);
    return m;
  };
  std::vector<std::size_t> type_order(opt.types);
  std::iota(type_order.begin(), type_order.end(), 0);

  std::vector<detail::RelationPlan> plans;
  std::vector<std::vector<Triple>> edges;
  auto realize = [&](const detail::RelationPlan& p, RelationId r) {
    std::vector<Triple> out;
    std::vector<std::size_t> pick(group_size);
    for (std::size_t g = 0; g < opt.groups; ++g) {
      for (std::size_t k = 0; k < group_size; ++k) {
        std::iota(pick.begin(), pick.end(), 0);
        std::shuffle(pick.begin(), pick.end(), rng);
        std::sort(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(opt.degree));
        for (std::size_t j = 0; j < opt.degree; ++j) {
          out.push_back({entity(p.src, g, k), r, entity(p.dst, p.group_map[g], pick[j])});
        }
      }
    }
    return out;
  };

  SyntheticKb kb;
  for (std::size_t i = 0; i < opt.rules; ++i) {
    std::shuffle(type_order.begin(), type_order.end(), rng);
    const std::size_t a = type_order[0], b = type_order[1], c = type_order[2];
    const auto tag = "rule" + std::to_string(i);
    const RelationId r1 = vocab.relations.add(tag + "_body1");
    const RelationId r2 = vocab.relations.add(tag + "_body2");
    const RelationId h = vocab.relations.add(tag + "_head");
    detail::RelationPlan p1{a, b, random_map()}, p2{b, c, random_map()};
    auto e1 = realize(p1, r1);
    auto e2 = realize(p2, r2);
    // Head = endpoints of every body path, in subject-major order.
    std::vector<std::vector<EntityId>> next(vocab.entities.size());
    for (const auto& t : e2) next[t.subject].push_back(t.object);
    std::vector<Triple> head;
    for (const auto& t : e1) {
      for (auto o : next[t.object]) head.push_back({t.subject, h, o});
    }
    std::sort(head.begin(), head.end());
    head.erase(std::unique(head.begin(), head.end()), head.end());
    edges.push_back(std::move(e1));
    edges.push_back(std::move(e2));
    edges.push_back(std::move(head));
    kb.planted.push_back({h, {r1, r2}});
  }
  for (std::size_t i = 0; i < opt.distractors; ++i) {
    const RelationId r = vocab.relations.add("distractor" + std::to_string(i));
    std::uniform_int_distribution<std::size_t> pick_type(0, opt.types - 1);
    detail::RelationPlan p{pick_type(rng), pick_type(rng), random_map()};
    edges.push_back(realize(p, r));
  }

  std::vector<Triple> train, test;
  for (auto& rel : edges) {
    std::shuffle(rel.begin(), rel.end(), rng);
    const auto n_test = static_cast<std::size_t>(static_cast<double>(rel.size()) * opt.holdout);
    test.insert(test.end(), rel.begin(), rel.begin() + static_cast<std::ptrdiff_t>(n_test));
    train.insert(train.end(), rel.begin() + static_cast<std::ptrdiff_t>(n_test), rel.end());
  }
  kb.store = TripleStore(std::move(vocab), std::move(train), {}, std::move(test));
  return kb;
}

}  // namespace embedrule
