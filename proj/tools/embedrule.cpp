#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "embedrule/cli.hpp"

using namespace embedrule;
using namespace embedrule::cli;

namespace {

void add_data_options(CLI::App* cmd, DataPaths& data) {
  cmd->add_option("--data", data.dir, "directory holding train.txt, valid.txt and test.txt");
  cmd->add_option("--train", data.train, "training triples (overrides --data)");
  cmd->add_option("--valid", data.valid, "validation triples (overrides --data)");
  cmd->add_option("--test", data.test, "test triples (overrides --data)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-base embeddings, link prediction and rule mining"};
  app.require_subcommand(1);

  PrepareArgs prep;
  std::string exclude_prep;
  auto* prepare = app.add_subcommand("prepare", "Filter and normalize a dataset into a prepared directory");
  add_data_options(prepare, prep.data);
  prepare->add_option("--out", prep.out, "output directory")->required();
  prepare->add_option("--min-count", prep.min_count, "keep relations with at least this many training triples")
      ->check(CLI::PositiveNumber);
  prepare->add_option("--exclude", exclude_prep, "file of relation names to drop");
  prepare->add_flag("--drop-singleton-domains", prep.drop_singleton_domains,
                    "drop relations whose subject or object domain has one entity");
  prepare->add_flag("--inverses", prep.inverses, "add r^-1 for every relation");

  std::string config_path;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a config file");
  train_cmd->add_option("config", config_path, "config file")->required();

  EvalArgs ev;
  std::string mode = "filtered";
  auto* eval = app.add_subcommand("eval", "Link-prediction metrics on the test split");
  eval->add_option("--checkpoint", ev.checkpoint)->required();
  add_data_options(eval, ev.data);
  eval->add_option("--out", ev.out, "report directory")->capture_default_str();
  eval->add_option("--mode", mode, "raw, filtered or both")
      ->check(CLI::IsMember({"raw", "filtered", "both"}))
      ->capture_default_str();
  eval->add_flag("--map", ev.map, "also compute type-checked MAP");
  eval->add_option("--category-threshold", ev.category_threshold)->capture_default_str();
  eval->add_option("--threads", ev.threads)->check(CLI::PositiveNumber)->capture_default_str();

  RulesArgs ru;
  std::string exclude_rules;
  double delta = -1.0;
  auto* rules = app.add_subcommand("rules", "Mine closed-path rules from relation embeddings");
  rules->add_option("--checkpoint", ru.checkpoint)->required();
  add_data_options(rules, ru.data);
  rules->add_option("--out", ru.out, "output directory")->capture_default_str();
  rules->add_option("--length", ru.lengths, "body length, 2 or 3 (repeatable)")
      ->check(CLI::IsMember({2, 3}))
      ->capture_default_str();
  rules->add_option("--K", ru.neighbors, "nearest sequences kept per head")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rules->add_option("--delta", delta, "distance threshold (default depends on the model)")
      ->check(CLI::NonNegativeNumber);
  rules->add_option("--exclude", exclude_rules, "file of relation names never used in rules");
  rules->add_option("--cap", ru.cap, "prediction cap for the precision curve")->capture_default_str();
  rules->add_option("--threads", ru.threads)->check(CLI::PositiveNumber)->capture_default_str();

  std::string export_ckpt, export_out;
  bool export_entities = false, export_relations = false;
  auto* exp = app.add_subcommand("export", "Write embedding vectors as text");
  exp->add_option("--checkpoint", export_ckpt)->required();
  auto* ent_flag = exp->add_flag("--entities", export_entities, "entity vectors");
  auto* rel_flag = exp->add_flag("--relations", export_relations, "relation parameters, row-major");
  ent_flag->excludes(rel_flag);
  exp->add_option("--out", export_out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*prepare) {
      if (!exclude_prep.empty()) prep.exclude = exclude_prep;
      return run_prepare(prep, std::cout);
    }
    if (*train_cmd) return run_train(config_path, std::cout);
    if (*eval) {
      if (mode == "both") ev.modes = {RankMode::Raw, RankMode::Filtered};
      else ev.modes = {mode == "raw" ? RankMode::Raw : RankMode::Filtered};
      run_eval(ev, std::cout);
      return kOk;
    }
    if (*rules) {
      if (delta >= 0.0) ru.delta = delta;
      if (!exclude_rules.empty()) ru.exclude = exclude_rules;
      run_rules(ru, std::cout);
      return kOk;
    }
    if (*exp) {
      if (!export_entities && !export_relations) throw ConfigError("export needs --entities or --relations");
      return run_export(export_ckpt, export_entities ? ExportTable::Entities : ExportTable::Relations, export_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
