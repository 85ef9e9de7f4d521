#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "embedrule/rules.hpp"
#include "embedrule/synthetic.hpp"
#include "embedrule/trainer.hpp"
#include "oracles.hpp"

using namespace embedrule;

namespace {

using Named = std::tuple<std::string, std::string, std::string>;

TripleStore named_store(const std::vector<Named>& train, const std::vector<Named>& valid = {},
                        const std::vector<Named>& test = {}) {
  Vocabulary v;
  auto ids = [&](const std::vector<Named>& in) {
    std::vector<Triple> out;
    for (const auto& [s, r, o] : in) out.push_back({v.entities.add(s), v.relations.add(r), v.entities.add(o)});
    return out;
  };
  auto tr = ids(train), va = ids(valid), te = ids(test);
  return TripleStore(std::move(v), std::move(tr), std::move(va), std::move(te));
}

RelationId rel(const TripleStore& st, std::string_view name) { return st.vocab().relations.lookup(name); }

// Reference EmbedRule: exhaustive body search, then the same K / delta / gap
// / zero-prediction steps, using the nested-loop join for counts.
std::vector<RuleCandidate> brute_embed_rule(const Model& m, const TripleStore& st, std::size_t k, double delta,
                                            std::vector<std::size_t> lengths) {
  const auto n_r = static_cast<RelationId>(st.num_relations());
  std::vector<RuleCandidate> out;
  for (RelationId h = 0; h < n_r; ++h) {
    for (auto len : lengths) {
      std::vector<ScoredSequence> all;
      RelationSequence body(len);
      std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == len) {
          if (oracle::brute_admissible(st, h, body)) {
            all.push_back({body, relation_distance(relation_embedding(m, h), compose_relations(m, body))});
          }
          return;
        }
        for (RelationId r = 0; r < n_r; ++r) {
          body[i] = r;
          rec(i + 1);
        }
      };
      rec(0);
      std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.body < b.body;
      });
      if (all.size() > k) all.resize(k);
      std::erase_if(all, [&](const auto& s) { return s.distance > delta; });
      if (all.empty()) continue;
      std::size_t best = 1;
      double gap = -1;
      for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        if (all[i + 1].distance - all[i].distance > gap) {
          gap = all[i + 1].distance - all[i].distance;
          best = i + 1;
        }
      }
      all.resize(best);
      for (const auto& s : all) {
        Rule rule{h, s.body};
        auto preds = oracle::brute_join(st, rule);
        if (preds.empty()) continue;
        std::size_t correct = 0;
        for (const auto& t : preds) correct += st.in_split(t, Split::Train);
        out.push_back({rule, s.distance, correct, preds.size(), double(correct) / double(preds.size())});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.confidence > b.confidence; });
  return out;
}

}  // namespace

TEST(EnumerateSequences, DisjointDomainsGiveNothing) {
  auto st = named_store({{"a1", "r1", "a2"}, {"b1", "r2", "b2"}, {"c1", "r3", "c2"}});
  auto dom = compute_domains(st);
  for (RelationId h = 0; h < 3; ++h) {
    EXPECT_TRUE(enumerate_sequences(dom, h, 2).empty());
    EXPECT_TRUE(enumerate_sequences(dom, h, 3).empty());
  }
}

TEST(EnumerateSequences, ToyChain) {
  auto st = named_store({{"a1", "r1", "b1"}, {"a2", "r1", "b2"}, {"b1", "r2", "c1"}, {"b2", "r2", "c2"},
                         {"a1", "r3", "c1"}, {"a2", "r3", "c2"}});
  auto dom = compute_domains(st);
  auto seqs = enumerate_sequences(dom, rel(st, "r3"), 2);
  ASSERT_EQ(seqs.size(), 1u);
  EXPECT_EQ(seqs[0], (RelationSequence{rel(st, "r1"), rel(st, "r2")}));
}

TEST(EnumerateSequences, BadLengthRaises) {
  auto st = named_store({{"a", "r", "b"}});
  auto dom = compute_domains(st);
  EXPECT_THROW(enumerate_sequences(dom, 0, 1), Error);
  EXPECT_THROW(enumerate_sequences(dom, 0, 4), Error);
}

TEST(EnumerateSequences, MatchesBruteAdmissibility) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    auto st = oracle::random_store(rng, 25, 6, 70, 0.0, 0.0);
    auto dom = compute_domains(st);
    for (RelationId h = 0; h < st.num_relations(); ++h) {
      for (std::size_t len : {2u, 3u}) {
        auto got = enumerate_sequences(dom, h, len);
        std::vector<RelationSequence> want;
        RelationSequence body(len);
        std::function<void(std::size_t)> rec = [&](std::size_t i) {
          if (i == len) {
            if (oracle::brute_admissible(st, h, body)) want.push_back(body);
            return;
          }
          for (RelationId r = 0; r < st.num_relations(); ++r) {
            body[i] = r;
            rec(i + 1);
          }
        };
        rec(0);
        EXPECT_EQ(got, want) << "seed " << seed << " head " << h << " len " << len;
      }
    }
  }
}

TEST(GapCutoff, Examples) {
  const double a[] = {0.1, 0.2, 0.9, 1.0};
  const double b[] = {0.5};
  const double c[] = {1.0, 2.0, 3.0};
  EXPECT_EQ(gap_cutoff(a), 2u);
  EXPECT_EQ(gap_cutoff(b), 1u);
  EXPECT_EQ(gap_cutoff(c), 1u);
  EXPECT_THROW(gap_cutoff(std::span<const double>{}), Error);
}

TEST(GapCutoff, AppendingSmallerGapsKeepsCut) {
  std::vector<double> d{0.1, 0.2, 0.9, 1.0};
  for (double x : {1.1, 1.5, 1.6}) {
    d.push_back(x);
    EXPECT_EQ(gap_cutoff(d), 2u);
  }
  d.push_back(3.0);
  EXPECT_EQ(gap_cutoff(d), 7u);
}

TEST(Instantiate, Examples) {
  auto st = named_store({{"a", "B1", "b"}, {"b", "B2", "c"}});
  Rule rule{0, {rel(st, "B1"), rel(st, "B2")}};
  auto p = instantiate_rule(rule, st);
  ASSERT_EQ(p.size(), 1u);
  const auto& E = st.vocab().entities;
  EXPECT_EQ(p[0].triple, (Triple{E.lookup("a"), 0, E.lookup("c")}));
  EXPECT_EQ(p[0].path, (std::vector<EntityId>{E.lookup("a"), E.lookup("b"), E.lookup("c")}));

  auto two = named_store({{"a", "B1", "b"}, {"b", "B2", "c"}, {"a", "B1", "x"}, {"x", "B2", "c"}});
  EXPECT_EQ(instantiate_rule({0, {rel(two, "B1"), rel(two, "B2")}}, two).size(), 1u);
}

TEST(Instantiate, MatchesNestedLoopJoin) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    auto st = oracle::random_store(rng, 15, 4, 100, 0.0, 0.0);
    PathIndex index(st);
    for (RelationId a = 0; a < 4; ++a) {
      for (RelationId b = 0; b < 4; ++b) {
        for (auto body : {RelationSequence{a, b}, RelationSequence{a, b, static_cast<RelationId>((a + b) % 4)}}) {
          Rule rule{static_cast<RelationId>(3 - a), body};
          std::set<Triple> got;
          for (const auto& p : instantiate_rule(rule, index)) {
            EXPECT_TRUE(got.insert(p.triple).second);
            ASSERT_EQ(p.path.size(), body.size() + 1);
            for (std::size_t i = 0; i < body.size(); ++i) {
              EXPECT_TRUE(st.in_train({p.path[i], body[i], p.path[i + 1]}));
            }
          }
          EXPECT_EQ(got, oracle::brute_join(st, rule));
        }
      }
    }
  }
}

TEST(Confidence, Examples) {
  // B1 then B2 yields four predictions (a_i, H, c); three of them are in train.
  std::vector<Named> train;
  for (auto a : {"a1", "a2", "a3", "a4"}) {
    train.push_back({a, "B1", "b"});
  }
  train.push_back({"b", "B2", "c"});
  train.push_back({"a1", "H", "c"});
  train.push_back({"a2", "H", "c"});
  auto none = named_store(train);
  const Rule rule{rel(none, "H"), {rel(none, "B1"), rel(none, "B2")}};
  train.push_back({"a3", "H", "c"});
  auto three = named_store(train);
  EXPECT_DOUBLE_EQ(*confidence(rule, three), 0.75);
  train.push_back({"a4", "H", "c"});
  EXPECT_DOUBLE_EQ(*confidence(rule, named_store(train)), 1.0);

  auto zero = named_store({{"a", "B1", "b"}, {"b", "B2", "c"}, {"z", "H", "z"}});
  EXPECT_DOUBLE_EQ(*confidence({rel(zero, "H"), {rel(zero, "B1"), rel(zero, "B2")}}, zero), 0.0);
  auto empty = named_store({{"a", "B1", "b"}, {"x", "B2", "c"}, {"z", "H", "z"}});
  EXPECT_FALSE(confidence({rel(empty, "H"), {rel(empty, "B1"), rel(empty, "B2")}}, empty));
}

TEST(PrecisionCurve, SingleRule) {
  std::vector<Named> train, test;
  train.push_back({"b", "B2", "c"});
  train.push_back({"q", "H", "q"});
  for (int i = 0; i < 10; ++i) {
    const auto a = "a" + std::to_string(i);
    train.push_back({a, "B1", "b"});
    if (i < 7) test.push_back({a, "H", "c"});
  }
  auto st = named_store(train, {}, test);
  RuleCandidate rc;
  rc.rule = {rel(st, "H"), {rel(st, "B1"), rel(st, "B2")}};
  std::vector<RuleCandidate> rules{rc};
  auto curve = precision_curve(rules, st);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_EQ(curve[0].predictions, 10u);
  EXPECT_DOUBLE_EQ(curve[0].precision, 0.7);

  // Same rule twice: the pool does not grow and no new point appears.
  rules.push_back(rc);
  EXPECT_EQ(precision_curve(rules, st).size(), 1u);
}

TEST(PrecisionCurve, SeenPredictionsAreIgnored) {
  auto st = named_store({{"a", "B1", "b"}, {"b", "B2", "c"}, {"a", "H", "c"}, {"x", "B1", "b"}}, {{"x", "H", "c"}});
  RuleCandidate rc;
  rc.rule = {rel(st, "H"), {rel(st, "B1"), rel(st, "B2")}};
  std::vector<RuleCandidate> rules{rc};
  EXPECT_TRUE(precision_curve(rules, st).empty());
}

TEST(PrecisionCurve, OverlappingRulesCountedOnce) {
  auto st = named_store({{"a", "B1", "b"}, {"b", "B2", "c"}, {"a", "C1", "d"}, {"d", "C2", "c"}, {"a", "C1", "e"},
                         {"e", "C2", "f"}, {"z", "H", "z"}},
                        {}, {{"a", "H", "c"}});
  RuleCandidate r1, r2;
  r1.rule = {rel(st, "H"), {rel(st, "B1"), rel(st, "B2")}};
  r2.rule = {rel(st, "H"), {rel(st, "C1"), rel(st, "C2")}};
  std::vector<RuleCandidate> rules{r1, r2};
  auto curve = precision_curve(rules, st);
  ASSERT_EQ(curve.size(), 2u);
  EXPECT_EQ(curve[0].predictions, 1u);
  EXPECT_DOUBLE_EQ(curve[0].precision, 1.0);
  EXPECT_EQ(curve[1].predictions, 2u);
  EXPECT_DOUBLE_EQ(curve[1].precision, 0.5);
}

TEST(PrecisionCurve, CapStopsBeforeNextRule) {
  std::mt19937_64 rng(4);
  auto st = oracle::random_store(rng, 30, 4, 300);
  std::vector<RuleCandidate> rules;
  for (RelationId a = 0; a < 4; ++a) {
    for (RelationId b = 0; b < 4; ++b) rules.push_back({{static_cast<RelationId>((a + b) % 4), {a, b}}, 0, 0, 0, 0});
  }
  auto full = precision_curve(rules, st, 1000000);
  ASSERT_GT(full.size(), 2u);
  for (std::size_t i = 1; i < full.size(); ++i) EXPECT_GT(full[i].predictions, full[i - 1].predictions);
  for (const auto& p : full) {
    EXPECT_GE(p.precision, 0.0);
    EXPECT_LE(p.precision, 1.0);
  }
  const std::size_t cap = full[1].predictions;
  auto capped = precision_curve(rules, st, cap);
  ASSERT_EQ(capped.size(), 2u);
  EXPECT_EQ(capped.back().predictions, cap);
}

TEST(DefaultDelta, Presets) {
  EXPECT_EQ(default_delta(ModelKind::DistMult, Projection::Tanh, 2), 9.2);
  EXPECT_EQ(default_delta(ModelKind::DistMult, Projection::Linear, 2), 36.3);
  EXPECT_EQ(default_delta(ModelKind::Bilinear, Projection::Linear, 2), 1.9);
  EXPECT_EQ(default_delta(ModelKind::TransE, Projection::Linear, 2), 3.4);
  EXPECT_EQ(default_delta(ModelKind::DistMult, Projection::Tanh, 3), 9.1);
  EXPECT_EQ(default_delta(ModelKind::DistMult, Projection::Linear, 3), 48.8);
  EXPECT_EQ(default_delta(ModelKind::Bilinear, Projection::Linear, 3), 2.9);
  EXPECT_EQ(default_delta(ModelKind::TransE, Projection::Linear, 3), 1.1);
  EXPECT_FALSE(default_delta(ModelKind::Ntn, Projection::Linear, 2));
}

TEST(EmbedRule, NonComposableModelsRaise) {
  std::mt19937_64 rng(1);
  auto st = oracle::random_store(rng, 10, 3, 30, 0, 0);
  auto dom = compute_domains(st);
  for (auto kind : {ModelKind::Ntn, ModelKind::BilinearLinear}) {
    auto m = init_model({kind, 4, kind == ModelKind::Ntn ? 2u : 1u, Projection::Linear}, 10, 3, 1);
    EXPECT_THROW(embed_rule(m, st, dom), CapabilityError);
  }
  auto m = init_model({ModelKind::DistMult, 4, 1, Projection::Linear}, 10, 3, 1);
  EmbedRuleOptions opt;
  opt.neighbors = 0;
  EXPECT_THROW(embed_rule(m, st, dom, opt), ConfigError);
}

TEST(EmbedRule, ZeroDeltaKeepsNothing) {
  std::mt19937_64 rng(2);
  auto st = oracle::random_store(rng, 20, 5, 150, 0, 0);
  auto dom = compute_domains(st);
  for (auto kind : {ModelKind::DistMult, ModelKind::Bilinear, ModelKind::TransE}) {
    auto m = init_model({kind, 6, 1, Projection::Linear}, st.num_entities(), st.num_relations(), 3);
    EmbedRuleOptions opt;
    opt.delta = {{2, 0.0}, {3, 0.0}};
    opt.lengths = {2, 3};
    EXPECT_TRUE(embed_rule(m, st, dom, opt).empty());
  }
}

TEST(EmbedRule, MatchesExhaustiveReference) {
  std::size_t total = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    std::mt19937_64 rng(seed);
    auto st = oracle::random_store(rng, 20, 5, 120, 0, 0);
    auto dom = compute_domains(st);
    for (auto kind : {ModelKind::DistMult, ModelKind::Bilinear, ModelKind::TransE}) {
      auto m = init_model({kind, 4, 1, Projection::Tanh}, st.num_entities(), st.num_relations(), seed);
      EmbedRuleOptions opt;
      opt.neighbors = 6;
      opt.lengths = {2, 3};
      opt.delta = {{2, 1e9}, {3, 1e9}};
      opt.threads = 3;
      auto got = embed_rule(m, st, dom, opt);
      auto want = brute_embed_rule(m, st, 6, 1e9, {2, 3});
      ASSERT_EQ(got.size(), want.size()) << "seed " << seed << " " << to_string(kind);
      total += got.size();
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].rule.head, want[i].rule.head);
        EXPECT_EQ(got[i].rule.body, want[i].rule.body);
        EXPECT_NEAR(got[i].distance, want[i].distance, 1e-12);
        EXPECT_EQ(got[i].n_predictions, want[i].n_predictions);
        EXPECT_EQ(got[i].support, want[i].support);
        EXPECT_TRUE(oracle::brute_admissible(st, got[i].rule.head, got[i].rule.body));
        if (i) {
          EXPECT_GE(got[i - 1].confidence, got[i].confidence);
        }
      }
    }
  }
  EXPECT_GT(total, 50u);
}

TEST(EmbedRule, ExcludedRelationsNeverAppear) {
  std::mt19937_64 rng(6);
  auto st = oracle::random_store(rng, 15, 5, 150, 0, 0);
  auto dom = compute_domains(st);
  auto m = init_model({ModelKind::DistMult, 4, 1, Projection::Linear}, st.num_entities(), st.num_relations(), 1);
  EmbedRuleOptions opt;
  opt.delta = {{2, 1e9}};
  opt.excluded = {1};
  for (const auto& rc : embed_rule(m, st, dom, opt)) {
    EXPECT_NE(rc.rule.head, 1u);
    EXPECT_EQ(std::count(rc.rule.body.begin(), rc.rule.body.end(), 1u), 0);
  }
}

TEST(EmbedRule, DistMultDistanceIgnoresBodyOrder) {
  auto m = init_model({ModelKind::DistMult, 8, 1, Projection::Linear}, 4, 4, 7);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  for (auto& x : m.relation_table()) x = n(rng);
  const RelationId pq[] = {0, 1}, qp[] = {1, 0};
  const auto head = relation_embedding(m, 2);
  EXPECT_NEAR(relation_distance(head, compose_relations(m, pq)), relation_distance(head, compose_relations(m, qp)),
              1e-12);
}

TEST(EmbedRule, PlantedRuleIsNearestForItsHead) {
  int found = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticOptions so;
    so.seed = seed;
    so.distractors = 4;
    auto kb = make_planted_kb(so);
    auto m = init_model({ModelKind::DistMult, 20, 1, Projection::Linear}, kb.store.num_entities(),
                        kb.store.num_relations(), seed);
    TrainConfig c;
    c.epochs = 200;
    c.seed = seed;
    train(m, kb.store, c);
    SequenceIndex index(compute_domains(kb.store));
    const auto& planted = kb.planted.front();
    auto ranked = rank_sequences(m, index, planted.head, 2);
    ASSERT_FALSE(ranked.empty());
    found += ranked.front().body == planted.body;
  }
  EXPECT_GE(found, 4);
}
