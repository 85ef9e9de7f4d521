#pragma once
// Command implementations behind the `embedrule` executable. Argument
// parsing lives in tools/embedrule.cpp; everything here takes plain structs
// so the commands can be driven from tests.

#include <chrono>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "embedrule/checkpoint.hpp"
#include "embedrule/config.hpp"
#include "embedrule/digest.hpp"
#include "embedrule/errors.hpp"
#include "embedrule/eval.hpp"
#include "embedrule/io.hpp"
#include "embedrule/kb.hpp"
#include "embedrule/model.hpp"
#include "embedrule/rules.hpp"
#include "embedrule/trainer.hpp"

namespace embedrule::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

// Dataset location: either a prepared directory (train.txt, valid.txt,
// test.txt) or three explicit files.
struct DataPaths {
  fs::path dir;
  fs::path train, valid, test;

  fs::path resolve(const fs::path& explicit_path, const char* name) const {
    if (!explicit_path.empty()) return explicit_path;
    if (dir.empty()) throw ConfigError(std::string("no data directory and no --") + name + " file given");
    return dir / (std::string(name) + ".txt");
  }
  TripleStore load(StoreLoadReport* report = nullptr) const {
    const auto tr = resolve(train, "train"), va = resolve(valid, "valid"), te = resolve(test, "test");
    for (const auto& p : {tr, va, te}) {
      if (!fs::exists(p)) throw ConfigError("data file '" + p.string() + "' does not exist");
    }
    return load_store(tr, va, te, report);
  }
};

// Relation names, one per line; blank lines and '#' comments ignored.
inline std::vector<RelationId> read_relation_list(const fs::path& path, const TokenTable& relations) {
  if (!fs::exists(path)) throw ConfigError("relation list '" + path.string() + "' does not exist");
  auto in = open_input(path);
  std::vector<RelationId> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto id = relations.find(line);
    if (!id) throw ConfigError("relation list '" + path.string() + "': unknown relation '" + line + "'");
    out.push_back(*id);
  }
  return out;
}

// ---------------------------------------------------------------- prepare

struct PrepareArgs {
  DataPaths data;
  fs::path out;
  std::size_t min_count = 1;
  std::optional<fs::path> exclude;
  bool drop_singleton_domains = false;
  bool inverses = false;
};

inline void print_store_summary(std::ostream& log, const char* label, const TripleStore& s) {
  log << fmt::format("{}: {} triples (train {}, valid {}, test {}), {} entities, {} relations\n", label,
                     s.train().size() + s.valid().size() + s.test().size(), s.train().size(), s.valid().size(),
                     s.test().size(), s.num_entities(), s.num_relations());
}

inline int run_prepare(const PrepareArgs& a, std::ostream& log) {
  if (a.out.empty()) throw ConfigError("--out is required");
  StoreLoadReport report;
  auto store = a.data.load(&report);
  print_store_summary(log, "loaded", store);
  if (report.duplicates) log << "dropped " << report.duplicates << " duplicate lines within a split\n";
  if (report.cross_split) log << "warning: " << report.cross_split << " triples appear in more than one split\n";
  if (a.min_count > 1) {
    store = filter_frequent_relations(store, a.min_count);
    print_store_summary(log, fmt::format("min_count {}", a.min_count).c_str(), store);
  }
  if (a.exclude) {
    auto ids = read_relation_list(*a.exclude, store.vocab().relations);
    store = exclude_relations(store, ids);
    print_store_summary(log, "after exclusions", store);
  }
  if (a.drop_singleton_domains) {
    auto ids = singleton_domain_relations(compute_domains(store));
    store = exclude_relations(store, ids);
    print_store_summary(log, "after singleton-domain removal", store);
  }
  if (a.inverses) {
    store = augment_inverses(store);
    print_store_summary(log, "with inverses", store);
  }
  save_triples(a.out / "train.txt", store.train(), store.vocab());
  save_triples(a.out / "valid.txt", store.valid(), store.vocab());
  save_triples(a.out / "test.txt", store.test(), store.vocab());
  // Reload so the vocabulary files match what every later command sees.
  auto reloaded = DataPaths{a.out, {}, {}, {}}.load();
  save_tokens(a.out / "entities.txt", reloaded.vocab().entities);
  save_tokens(a.out / "relations.txt", reloaded.vocab().relations);
  return kOk;
}

// ---------------------------------------------------------------- train

inline void write_history_csv(std::ostream& out, const TrainHistory& h) {
  out << "epoch,mean_loss,active_pairs,valid_mrr\n";
  for (const auto& e : h.epochs) {
    out << fmt::format("{},{:.17g},{},", e.epoch, e.mean_loss, e.active_pairs);
    if (e.valid_mrr) out << fmt::format("{:.17g}", *e.valid_mrr);
    out << '\n';
  }
}

inline int run_train(const fs::path& config_path, std::ostream& log) {
  RunConfig cfg;
  try {
    if (!fs::exists(config_path)) throw ConfigError("config file '" + config_path.string() + "' does not exist");
    cfg = load_config(config_path);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  check_dataset_paths(cfg);
  cfg.train_config.check();

  const auto started = std::chrono::steady_clock::now();
  StoreLoadReport report;
  auto store = load_store(cfg.train, cfg.valid, cfg.test, &report);
  print_store_summary(log, "data", store);
  if (report.cross_split) log << "warning: " << report.cross_split << " triples appear in more than one split\n";

  std::optional<PretrainedVectors> pretrained;
  if (cfg.pretrained) pretrained = load_pretrained(*cfg.pretrained);
  auto model = init_model(cfg.shape, store.num_entities(), store.num_relations(), cfg.train_config.seed,
                          pretrained ? &*pretrained : nullptr, &store.vocab().entities);
  AdaGradState state(model);

  EpochHook hook = [&](const Model& m, const AdaGradState& st, std::size_t epoch) -> std::optional<double> {
    if (cfg.checkpoint_every && epoch % cfg.checkpoint_every == 0) {
      save_checkpoint(cfg.output / fmt::format("checkpoint-epoch{}.bin", epoch), m, store.vocab(), &st);
    }
    std::optional<double> mrr;
    if (cfg.valid_every && epoch % cfg.valid_every == 0 && !store.valid().empty()) {
      EvalOptions opt;
      opt.threads = cfg.train_config.threads;
      mrr = evaluate(ModelScorer(m), store, store.valid(), opt).mrr;
    }
    log << fmt::format("epoch {}", epoch);
    if (mrr) log << fmt::format(" valid_mrr {:.6f}", *mrr);
    log << '\n';
    return mrr;
  };
  auto history = train(model, store, cfg.train_config, &state, hook);

  const fs::path ckpt = cfg.output / "checkpoint.bin";
  save_checkpoint(ckpt, model, store.vocab(), &state);
  write_file_atomic(cfg.output / "history.csv", [&](std::ostream& out) { write_history_csv(out, history); });

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  nlohmann::json manifest;
  manifest["config"] = to_json(cfg);
  manifest["seed"] = cfg.train_config.seed;
  manifest["datasets"] = {{"train", {{"path", cfg.train.string()}, {"sha256", sha256_file(cfg.train)}}},
                          {"valid", {{"path", cfg.valid.string()}, {"sha256", sha256_file(cfg.valid)}}},
                          {"test", {{"path", cfg.test.string()}, {"sha256", sha256_file(cfg.test)}}}};
  if (cfg.pretrained) manifest["pretrained_sha256"] = sha256_file(*cfg.pretrained);
  manifest["vocab_sha256"] = vocab_digest(store.vocab());
  manifest["wall_clock_seconds"] = seconds;
  nlohmann::json summary;
  summary["epochs"] = history.epochs.size();
  if (!history.epochs.empty()) {
    summary["final_mean_loss"] = history.epochs.back().mean_loss;
    summary["final_active_pairs"] = history.epochs.back().active_pairs;
    if (history.epochs.back().valid_mrr) summary["final_valid_mrr"] = *history.epochs.back().valid_mrr;
  }
  summary["checkpoint_sha256"] = sha256_file(ckpt);
  manifest["metrics"] = summary;
  write_file_atomic(cfg.output / "manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
  log << "wrote " << ckpt.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  fs::path checkpoint;
  DataPaths data;
  fs::path out = "eval";
  std::vector<RankMode> modes = {RankMode::Filtered};
  bool map = false;
  double category_threshold = 1.5;
  std::size_t threads = 1;
};

inline std::vector<EvalReport> run_eval(const EvalArgs& a, std::ostream& log) {
  auto store = a.data.load();
  if (store.test().empty()) throw Error("test split is empty");
  auto cp = load_checkpoint(a.checkpoint, &store.vocab());
  ModelScorer scorer(cp.model);
  FilterIndex filter(store);
  auto ranks = rank_queries(scorer, store.test(), filter, a.threads);
  auto cats = classify_relations(store, a.category_threshold);
  std::optional<MapReport> map;
  if (a.map) map = map_type_checked(scorer, store, compute_domains(store), store.test(), a.threads);

  std::vector<EvalReport> reports;
  for (auto mode : a.modes) {
    auto rep = summarize(ranks, mode, cats);
    rep.map = map;
    const auto tag = std::string(to_string(mode));
    write_file_atomic(a.out / ("metrics-" + tag + ".csv"), [&](std::ostream& o) { write_report_csv(o, rep); });
    write_file_atomic(a.out / ("categories-" + tag + ".csv"), [&](std::ostream& o) { write_category_table(o, rep); });
    write_file_atomic(a.out / ("report-" + tag + ".json"), [&](std::ostream& o) { o << to_json(rep).dump(2) << '\n'; });
    log << fmt::format("{}: MRR {:.4f}  HITS@10 {:.2f}%", tag, rep.mrr, rep.hits_at_10);
    if (rep.map) log << fmt::format("  MAP {:.4f} ({} skipped)", rep.map->map, rep.map->skipped);
    log << '\n';
    reports.push_back(rep);
  }
  return reports;
}

// ---------------------------------------------------------------- rules

struct RulesArgs {
  fs::path checkpoint;
  DataPaths data;
  fs::path out = "rules";
  std::vector<std::size_t> lengths = {2};
  std::size_t neighbors = kDefaultNeighbors;
  std::optional<double> delta;
  std::optional<fs::path> exclude;
  std::size_t cap = 10000;
  std::size_t threads = 1;
};

struct RulesResult {
  std::vector<RuleCandidate> rules;
  std::vector<PrecisionPoint> curve;
};

inline RulesResult run_rules(const RulesArgs& a, std::ostream& log) {
  for (auto len : a.lengths) {
    if (len != 2 && len != 3) throw ConfigError("--length must be 2 or 3");
  }
  auto store = a.data.load();
  auto cp = load_checkpoint(a.checkpoint, &store.vocab());
  EmbedRuleOptions opt;
  opt.neighbors = a.neighbors;
  opt.lengths = a.lengths;
  opt.threads = a.threads;
  if (a.delta) {
    for (auto len : a.lengths) opt.delta[len] = *a.delta;
  }
  if (a.exclude) opt.excluded = read_relation_list(*a.exclude, store.vocab().relations);

  RulesResult res;
  res.rules = embed_rule(cp.model, store, compute_domains(store), opt);
  PathIndex paths(store);
  std::vector<Triple> pooled;
  res.curve = precision_curve(res.rules, store, paths, a.cap, &pooled);

  write_file_atomic(a.out / "rules.tsv",
                    [&](std::ostream& o) { write_rules(o, res.rules, store.vocab().relations); });
  write_file_atomic(a.out / "predictions.tsv", [&](std::ostream& o) { write_triples(o, pooled, store.vocab()); });
  write_file_atomic(a.out / "precision.csv", [&](std::ostream& o) { write_precision_curve(o, res.curve); });
  log << fmt::format("{} rules, {} unseen predictions", res.rules.size(), pooled.size());
  if (!res.curve.empty()) log << fmt::format(", precision {:.4f}", res.curve.back().precision);
  log << '\n';
  return res;
}

// ---------------------------------------------------------------- export

enum class ExportTable { Entities, Relations };

inline void write_vectors(std::ostream& out, const Checkpoint& cp, ExportTable which) {
  const bool entities = which == ExportTable::Entities;
  const auto& names = entities ? cp.vocab.entities.names() : cp.vocab.relations.names();
  for (std::uint32_t i = 0; i < names.size(); ++i) {
    auto row = entities ? cp.model.entity(i) : cp.model.relation(i);
    out << names[i];
    for (double v : row) out << fmt::format(" {:.17g}", v);
    out << '\n';
  }
}

inline int run_export(const fs::path& checkpoint, ExportTable which, const fs::path& out) {
  auto cp = load_checkpoint(checkpoint);
  write_file_atomic(out, [&](std::ostream& o) { write_vectors(o, cp, which); });
  return kOk;
}

}  // namespace embedrule::cli
