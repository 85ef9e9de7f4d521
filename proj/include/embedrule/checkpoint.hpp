#pragma once
// Checkpoint file: a plain-text header terminated by an "end" line, then the
// parameter tables as little-endian IEEE-754 doubles (entities, relations,
// and optionally the AdaGrad accumulators in the same order).
//
//   embedrule-checkpoint 1
//   kind distmult
//   dim 100
//   slices 1
//   entities 14951
//   relations 1345
//   projection linear
//   vocab_sha256 <hex>
//   optimizer 1
//   vocabulary
//   <entity tokens, one per line>
//   <relation tokens, one per line>
//   end

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "embedrule/digest.hpp"
#include "embedrule/errors.hpp"
#include "embedrule/io.hpp"
#include "embedrule/kb.hpp"
#include "embedrule/model.hpp"
#include "embedrule/trainer.hpp"

namespace embedrule {

inline constexpr int kCheckpointVersion = 1;
inline constexpr std::string_view kCheckpointMagic = "embedrule-checkpoint";

// Digest over the ordered entity and relation tokens.
inline std::string vocab_digest(const Vocabulary& v) {
  Sha256 h;
  h.update("entities\n");
  for (const auto& n : v.entities.names()) h.update(n).update("\n");
  h.update("relations\n");
  for (const auto& n : v.relations.names()) h.update(n).update("\n");
  return h.hex();
}

struct Checkpoint {
  Model model;
  Vocabulary vocab;
  std::optional<AdaGradState> optimizer;
};

namespace detail {

inline void write_doubles(std::ostream& out, const std::vector<double>& v) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  } else {
    for (double x : v) {
      auto u = std::bit_cast<std::uint64_t>(x);
      char b[8];
      for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xff);
      out.write(b, 8);
    }
  }
}

inline void read_doubles(std::istream& in, std::vector<double>& v, const std::string& source) {
  std::vector<unsigned char> raw(v.size() * sizeof(double));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw FormatError(source + ": truncated parameter data");
  for (std::size_t k = 0; k < v.size(); ++k) {
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t{raw[k * 8 + i]} << (8 * i);
    v[k] = std::bit_cast<double>(u);
  }
}

inline std::string header_line(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(source + ": truncated checkpoint header");
  return line;
}

}  // namespace detail

inline void write_checkpoint(std::ostream& out, const Model& model, const Vocabulary& vocab,
                             const AdaGradState* optimizer = nullptr) {
  if (vocab.entities.size() != model.num_entities() || vocab.relations.size() != model.num_relations()) {
    throw DimensionError("vocabulary size does not match model tables");
  }
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n'
      << "kind " << to_string(model.kind()) << '\n'
      << "dim " << model.dim() << '\n'
      << "slices " << model.slices() << '\n'
      << "entities " << model.num_entities() << '\n'
      << "relations " << model.num_relations() << '\n'
      << "projection " << to_string(model.projection()) << '\n'
      << "vocab_sha256 " << vocab_digest(vocab) << '\n'
      << "optimizer " << (optimizer ? 1 : 0) << '\n'
      << "vocabulary\n";
  for (const auto& n : vocab.entities.names()) out << n << '\n';
  for (const auto& n : vocab.relations.names()) out << n << '\n';
  out << "end\n";
  detail::write_doubles(out, model.entity_table());
  detail::write_doubles(out, model.relation_table());
  if (optimizer) {
    detail::write_doubles(out, optimizer->entities);
    detail::write_doubles(out, optimizer->relations);
  }
}

inline void save_checkpoint(const fs::path& path, const Model& model, const Vocabulary& vocab,
                            const AdaGradState* optimizer = nullptr) {
  write_file_atomic(path, [&](std::ostream& out) { write_checkpoint(out, model, vocab, optimizer); }, true);
}

// Reads a checkpoint; when `expected` is given its digest must match the
// stored vocabulary.
inline Checkpoint read_checkpoint(std::istream& in, const std::string& source,
                                  const Vocabulary* expected = nullptr) {
  std::istringstream magic(detail::header_line(in, source));
  std::string tag;
  int version = 0;
  if (!(magic >> tag >> version) || tag != kCheckpointMagic) throw FormatError(source + ": not a checkpoint");
  if (version != kCheckpointVersion) {
    throw FormatError(source + ": unsupported checkpoint version " + std::to_string(version));
  }
  std::map<std::string, std::string> fields;
  for (;;) {
    auto line = detail::header_line(in, source);
    if (line == "vocabulary") break;
    auto sp = line.find(' ');
    if (sp == std::string::npos) throw FormatError(source + ": bad header line '" + line + "'");
    fields[line.substr(0, sp)] = line.substr(sp + 1);
  }
  auto field = [&](const char* key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw FormatError(source + ": header is missing '" + key + "'");
    return it->second;
  };
  auto count = [&](const char* key) -> std::size_t {
    try {
      return std::stoull(field(key));
    } catch (const std::logic_error&) {
      throw FormatError(source + ": bad value for '" + key + "'");
    }
  };

  ModelShape shape;
  try {
    shape.kind = parse_model_kind(field("kind"));
    shape.projection = parse_projection(field("projection"));
  } catch (const ConfigError& e) {
    throw FormatError(source + ": " + e.what());
  }
  shape.dim = count("dim");
  shape.slices = count("slices");
  const std::size_t n_e = count("entities");
  const std::size_t n_r = count("relations");
  const bool has_optimizer = count("optimizer") != 0;

  Checkpoint cp;
  for (std::size_t i = 0; i < n_e; ++i) cp.vocab.entities.add(detail::header_line(in, source));
  for (std::size_t i = 0; i < n_r; ++i) cp.vocab.relations.add(detail::header_line(in, source));
  if (cp.vocab.entities.size() != n_e || cp.vocab.relations.size() != n_r) {
    throw FormatError(source + ": duplicate vocabulary token");
  }
  if (detail::header_line(in, source) != "end") throw FormatError(source + ": missing header terminator");

  const std::string digest = vocab_digest(cp.vocab);
  if (digest != field("vocab_sha256")) throw FormatError(source + ": vocabulary digest does not match header");
  if (expected && vocab_digest(*expected) != digest) {
    throw FormatError(source + ": checkpoint vocabulary does not match the data (digest mismatch)");
  }

  cp.model = Model(shape, n_e, n_r);
  detail::read_doubles(in, cp.model.entity_table(), source);
  detail::read_doubles(in, cp.model.relation_table(), source);
  if (has_optimizer) {
    AdaGradState st(cp.model);
    detail::read_doubles(in, st.entities, source);
    detail::read_doubles(in, st.relations, source);
    cp.optimizer = std::move(st);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(source + ": trailing bytes after parameters");
  return cp;
}

inline Checkpoint load_checkpoint(const fs::path& path, const Vocabulary* expected = nullptr) {
  auto in = open_input(path, true);
  return read_checkpoint(in, path.string(), expected);
}

}  // namespace embedrule
