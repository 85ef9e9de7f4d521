#pragma once
// Run configuration: "key = value" lines, '#' starts a comment. A preset,
// when named, is applied first; every other key overrides it regardless of
// its position in the file.

#include <charconv>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "embedrule/errors.hpp"
#include "embedrule/io.hpp"
#include "embedrule/model.hpp"
#include "embedrule/trainer.hpp"

namespace embedrule {

struct RunConfig {
  std::string preset;
  fs::path train, valid, test;
  ModelShape shape;
  TrainConfig train_config;
  std::optional<fs::path> pretrained;
  fs::path output = "run";
  std::size_t checkpoint_every = 0;  // 0: final checkpoint only
  std::size_t valid_every = 0;       // 0: no per-epoch validation MRR
};

inline void apply_preset(RunConfig& c, std::string_view name) {
  if (name != "fb15k-default" && name != "wn-default") {
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected fb15k-default or wn-default)");
  }
  c.preset = std::string(name);
  c.shape.dim = 100;
  c.train_config.batches = 10;
  c.train_config.l2 = 1e-4;
  c.train_config.learning_rate = 0.1;
  c.train_config.margin = 1.0;
  c.train_config.epochs = name == "wn-default" ? 300 : 100;
}

inline RunConfig preset_config(std::string_view name) {
  RunConfig c;
  apply_preset(c, name);
  return c;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': invalid number '" + value + "'");
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_config(std::istream& in, const std::string& source = "config") {
  std::map<std::string, std::pair<std::string, std::size_t>> entries;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected 'key = value'");
    std::string key(detail::trim(line.substr(0, eq)));
    std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    if (entries.contains(key)) throw ParseError(source, line_no, "duplicate key '" + key + "'");
    entries[key] = {value, line_no};
  }

  RunConfig c;
  if (auto it = entries.find("preset"); it != entries.end()) apply_preset(c, it->second.first);
  for (const auto& [key, entry] : entries) {
    const auto& v = entry.first;
    if (key == "preset") continue;
    else if (key == "train") c.train = v;
    else if (key == "valid") c.valid = v;
    else if (key == "test") c.test = v;
    else if (key == "model") c.shape.kind = parse_model_kind(v);
    else if (key == "dim") c.shape.dim = detail::parse_number<std::size_t>(key, v);
    else if (key == "slices") c.shape.slices = detail::parse_number<std::size_t>(key, v);
    else if (key == "projection") c.shape.projection = parse_projection(v);
    else if (key == "epochs") c.train_config.epochs = detail::parse_number<std::size_t>(key, v);
    else if (key == "batches") c.train_config.batches = detail::parse_number<std::size_t>(key, v);
    else if (key == "learning_rate") c.train_config.learning_rate = detail::parse_number<double>(key, v);
    else if (key == "margin") c.train_config.margin = detail::parse_number<double>(key, v);
    else if (key == "l2") c.train_config.l2 = detail::parse_number<double>(key, v);
    else if (key == "seed") c.train_config.seed = detail::parse_number<std::uint64_t>(key, v);
    else if (key == "threads") c.train_config.threads = detail::parse_number<std::size_t>(key, v);
    else if (key == "pretrained") c.pretrained = fs::path(v);
    else if (key == "output") c.output = v;
    else if (key == "checkpoint_every") c.checkpoint_every = detail::parse_number<std::size_t>(key, v);
    else if (key == "valid_every") c.valid_every = detail::parse_number<std::size_t>(key, v);
    else throw ParseError(source, entry.second, "unknown key '" + key + "'");
  }
  if (c.shape.kind == ModelKind::Ntn && !entries.contains("slices")) c.shape.slices = kDefaultNtnSlices;
  if (c.shape.kind != ModelKind::Ntn) c.shape.slices = 1;
  return c;
}

inline RunConfig load_config(const fs::path& path) {
  auto in = open_input(path);
  return parse_config(in, path.string());
}

// Dataset paths must be named and exist; the error names the offending key.
inline void check_dataset_paths(const RunConfig& c) {
  const std::pair<const char*, const fs::path*> keys[] = {{"train", &c.train}, {"valid", &c.valid}, {"test", &c.test}};
  for (const auto& [key, path] : keys) {
    if (path->empty()) throw ConfigError(std::string("config key '") + key + "' is missing");
    if (!fs::exists(*path)) {
      throw ConfigError(std::string("config key '") + key + "': file '" + path->string() + "' does not exist");
    }
  }
  if (c.pretrained && !fs::exists(*c.pretrained)) {
    throw ConfigError("config key 'pretrained': file '" + c.pretrained->string() + "' does not exist");
  }
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["preset"] = c.preset;
  j["train"] = c.train.string();
  j["valid"] = c.valid.string();
  j["test"] = c.test.string();
  j["model"] = to_string(c.shape.kind);
  j["dim"] = c.shape.dim;
  j["slices"] = c.shape.slices;
  j["projection"] = to_string(c.shape.projection);
  j["epochs"] = c.train_config.epochs;
  j["batches"] = c.train_config.batches;
  j["learning_rate"] = c.train_config.learning_rate;
  j["margin"] = c.train_config.margin;
  j["l2"] = c.train_config.l2;
  j["seed"] = c.train_config.seed;
  j["threads"] = c.train_config.threads;
  j["pretrained"] = c.pretrained ? c.pretrained->string() : "";
  j["output"] = c.output.string();
  j["checkpoint_every"] = c.checkpoint_every;
  j["valid_every"] = c.valid_every;
  return j;
}

}  // namespace embedrule
