#pragma once
// Entity and relation embeddings for the five scoring models, with scores,
// analytic gradients, relation composition and relation distances.
//
// Every entity is a row of the projection table; its representation is the
// row itself (linear projection) or its elementwise tanh. Relation parameters
// live in one flat block per relation whose layout depends on the model kind:
//
//   TransE          V (d)
//   DistMult        diag(M) (d)
//   Bilinear        M (d x d, row-major)
//   BilinearLinear  T (d x d) | Q1 (d) | Q2 (d)            u fixed to 1
//   NTN             T (m x d x d) | Q1 (d x m) | Q2 (d x m) | u (m)

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "embedrule/errors.hpp"
#include "embedrule/io.hpp"
#include "embedrule/kb.hpp"

namespace embedrule {

enum class ModelKind : std::uint8_t { TransE, DistMult, Bilinear, BilinearLinear, Ntn };
enum class Projection : std::uint8_t { Linear, Tanh };

inline constexpr std::array<ModelKind, 5> kAllModelKinds = {ModelKind::TransE, ModelKind::DistMult,
                                                            ModelKind::Bilinear, ModelKind::BilinearLinear,
                                                            ModelKind::Ntn};

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::TransE: return "transe";
    case ModelKind::DistMult: return "distmult";
    case ModelKind::Bilinear: return "bilinear";
    case ModelKind::BilinearLinear: return "bilinear-linear";
    case ModelKind::Ntn: return "ntn";
  }
  return "?";
}

inline std::string_view to_string(Projection p) { return p == Projection::Tanh ? "tanh" : "linear"; }

inline ModelKind parse_model_kind(std::string_view s) {
  for (auto k : kAllModelKinds) {
    if (to_string(k) == s) return k;
  }
  if (s == "distadd") return ModelKind::TransE;
  if (s == "bilinear-diag") return ModelKind::DistMult;
  throw ConfigError("unknown model kind '" + std::string(s) + "'");
}

inline Projection parse_projection(std::string_view s) {
  if (s == "linear") return Projection::Linear;
  if (s == "tanh") return Projection::Tanh;
  throw ConfigError("unknown projection '" + std::string(s) + "'");
}

struct ModelShape {
  ModelKind kind = ModelKind::DistMult;
  std::size_t dim = 100;
  std::size_t slices = 1;  // tensor slices; only NTN uses more than one
  Projection projection = Projection::Linear;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

inline constexpr std::size_t kDefaultNtnSlices = 4;

// Offsets into one relation's parameter block.
struct RelationLayout {
  std::size_t bilinear = 0;  // V, diag, M or T
  std::size_t bilinear_size = 0;
  std::size_t linear_subject = 0;  // Q1
  std::size_t linear_object = 0;   // Q2
  std::size_t linear_size = 0;     // per Q block
  std::size_t weights = 0;         // u (NTN)
  std::size_t weights_size = 0;
  std::size_t size = 0;

  static RelationLayout of(const ModelShape& s) {
    const std::size_t d = s.dim;
    RelationLayout l;
    switch (s.kind) {
      case ModelKind::TransE:
      case ModelKind::DistMult:
        l.bilinear_size = d;
        break;
      case ModelKind::Bilinear:
        l.bilinear_size = d * d;
        break;
      case ModelKind::BilinearLinear:
        l.bilinear_size = d * d;
        l.linear_size = d;
        break;
      case ModelKind::Ntn:
        l.bilinear_size = s.slices * d * d;
        l.linear_size = d * s.slices;
        l.weights_size = s.slices;
        break;
    }
    l.linear_subject = l.bilinear_size;
    l.linear_object = l.linear_subject + l.linear_size;
    l.weights = l.linear_object + l.linear_size;
    l.size = l.weights + l.weights_size;
    return l;
  }
};

class Model {
 public:
  Model() = default;
  Model(ModelShape shape, std::size_t n_entities, std::size_t n_relations)
      : shape_(shape),
        layout_(RelationLayout::of(shape)),
        n_entities_(n_entities),
        n_relations_(n_relations),
        entities_(n_entities * shape.dim, 0.0),
        relations_(n_relations * layout_.size, 0.0) {
    if (shape.dim == 0) throw DimensionError("embedding dimension must be positive");
    if (shape.kind == ModelKind::Ntn && shape.slices == 0) throw DimensionError("NTN needs at least one slice");
    if (shape.kind != ModelKind::Ntn) shape_.slices = 1;
  }

  const ModelShape& shape() const { return shape_; }
  ModelKind kind() const { return shape_.kind; }
  std::size_t dim() const { return shape_.dim; }
  std::size_t slices() const { return shape_.slices; }
  Projection projection() const { return shape_.projection; }
  const RelationLayout& layout() const { return layout_; }
  std::size_t num_entities() const { return n_entities_; }
  std::size_t num_relations() const { return n_relations_; }

  std::span<double> entity(EntityId e) { return {entities_.data() + std::size_t{e} * shape_.dim, shape_.dim}; }
  std::span<const double> entity(EntityId e) const {
    return {entities_.data() + std::size_t{e} * shape_.dim, shape_.dim};
  }
  std::span<double> relation(RelationId r) {
    return {relations_.data() + std::size_t{r} * layout_.size, layout_.size};
  }
  std::span<const double> relation(RelationId r) const {
    return {relations_.data() + std::size_t{r} * layout_.size, layout_.size};
  }

  std::vector<double>& entity_table() { return entities_; }
  const std::vector<double>& entity_table() const { return entities_; }
  std::vector<double>& relation_table() { return relations_; }
  const std::vector<double>& relation_table() const { return relations_; }

  friend bool operator==(const Model& a, const Model& b) {
    return a.shape_ == b.shape_ && a.n_entities_ == b.n_entities_ && a.n_relations_ == b.n_relations_ &&
           a.entities_ == b.entities_ && a.relations_ == b.relations_;
  }

 private:
  ModelShape shape_;
  RelationLayout layout_;
  std::size_t n_entities_ = 0;
  std::size_t n_relations_ = 0;
  std::vector<double> entities_;
  std::vector<double> relations_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

// Tolerance on |row|^2 - 1 below which a row counts as already unit length
// and is left untouched (keeps normalization idempotent bit-for-bit).
inline constexpr double kUnitTolerance = 1e-12;

// Scales `row` to unit L2 norm. Returns false for an all-zero row.
inline bool normalize_row(std::span<double> row) {
  const double n2 = squared_norm(row);
  if (n2 == 0.0 || !std::isfinite(n2)) return false;
  if (std::abs(n2 - 1.0) <= kUnitTolerance) return true;
  const double n = std::sqrt(n2);
  for (auto& v : row) v /= n;
  return true;
}

template <class Rng>
void randomize_unit_row(std::span<double> row, Rng& rng) {
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  do {
    for (auto& v : row) v = u(rng);
  } while (!normalize_row(row));
}

using PretrainedVectors = std::unordered_map<std::string, std::vector<double>>;

// Reads "token v1 ... vd" lines. All vectors must share one length.
inline PretrainedVectors load_pretrained(const fs::path& path) {
  auto in = open_input(path);
  PretrainedVectors out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<double> values;
    std::string v;
    while (fields >> v) {
      try {
        values.push_back(std::stod(v));
      } catch (const std::exception&) {
        throw ParseError(path.string(), line_no, "bad number '" + v + "'");
      }
    }
    if (values.empty()) throw ParseError(path.string(), line_no, "no vector values");
    if (width == 0) width = values.size();
    if (values.size() != width) throw DimensionError(path.string() + ":" + std::to_string(line_no) + ": vector length " +
                                                     std::to_string(values.size()) + " != " + std::to_string(width));
    out[token] = std::move(values);
  }
  return out;
}

// Entity rows uniform in [-0.1, 0.1] then unit-normalized; relation
// parameters uniform in [-0.1, 0.1]. Entities found in `pretrained` copy their
// (normalized) vector instead; the random stream is consumed identically
// either way so other rows do not depend on file coverage.
inline Model init_model(const ModelShape& shape, std::size_t n_entities, std::size_t n_relations, std::uint64_t seed,
                        const PretrainedVectors* pretrained = nullptr, const TokenTable* entity_names = nullptr) {
  Model m(shape, n_entities, n_relations);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (EntityId e = 0; e < n_entities; ++e) randomize_unit_row(m.entity(e), rng);
  for (auto& v : m.relation_table()) v = u(rng);
  if (pretrained && !pretrained->empty()) {
    if (!entity_names) throw Error("pretrained vectors need entity names");
    for (EntityId e = 0; e < n_entities; ++e) {
      auto it = pretrained->find(entity_names->name(e));
      if (it == pretrained->end()) continue;
      if (it->second.size() != shape.dim) {
        throw DimensionError("pretrained vector for '" + it->first + "' has length " +
                             std::to_string(it->second.size()) + ", model dimension is " + std::to_string(shape.dim));
      }
      auto row = m.entity(e);
      std::copy(it->second.begin(), it->second.end(), row.begin());
      if (!normalize_row(row)) randomize_unit_row(row, rng);
    }
  }
  return m;
}

inline void project_into(const Model& m, EntityId e, std::span<double> out) {
  auto row = m.entity(e);
  if (m.projection() == Projection::Tanh) {
    for (std::size_t i = 0; i < row.size(); ++i) out[i] = std::tanh(row[i]);
  } else {
    std::copy(row.begin(), row.end(), out.begin());
  }
}

inline std::vector<double> project_entity(const Model& m, EntityId e) {
  std::vector<double> y(m.dim());
  project_into(m, e, y);
  return y;
}

namespace detail {

// Score of relation parameters `rel` on already-projected entity vectors.
inline double score_projected(const Model& m, std::span<const double> rel, std::span<const double> y1,
                              std::span<const double> y2) {
  const std::size_t d = m.dim();
  const auto& L = m.layout();
  switch (m.kind()) {
    case ModelKind::DistMult: {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += y1[i] * rel[i] * y2[i];
      return s;
    }
    case ModelKind::Bilinear: {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += y1[i] * dot(rel.subspan(i * d, d), y2);
      return s;
    }
    case ModelKind::TransE: {
      double ga = 0.0;
      for (std::size_t i = 0; i < d; ++i) ga += rel[i] * (y1[i] - y2[i]);
      return -(2.0 * ga - 2.0 * dot(y1, y2) + squared_norm(rel.first(d)));
    }
    case ModelKind::BilinearLinear: {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += y1[i] * dot(rel.subspan(i * d, d), y2);
      return s + dot(rel.subspan(L.linear_subject, d), y1) + dot(rel.subspan(L.linear_object, d), y2);
    }
    case ModelKind::Ntn: {
      const std::size_t k_slices = m.slices();
      double s = 0.0;
      for (std::size_t k = 0; k < k_slices; ++k) {
        auto T = rel.subspan(k * d * d, d * d);
        double z = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          z += y1[i] * dot(T.subspan(i * d, d), y2);
          z += rel[L.linear_subject + i * k_slices + k] * y1[i];
          z += rel[L.linear_object + i * k_slices + k] * y2[i];
        }
        s += rel[L.weights + k] * std::tanh(z);
      }
      return s;
    }
  }
  return 0.0;
}

// Adds scale * d(score)/d(params) into the three gradient buffers.
// dy1/dy2 are caller-provided scratch of length d.
inline void backprop_projected(const Model& m, std::span<const double> rel, std::span<const double> y1,
                               std::span<const double> y2, double scale, std::span<double> dy1,
                               std::span<double> dy2, std::span<double> g_rel) {
  const std::size_t d = m.dim();
  const auto& L = m.layout();
  switch (m.kind()) {
    case ModelKind::DistMult:
      for (std::size_t i = 0; i < d; ++i) {
        dy1[i] = rel[i] * y2[i];
        dy2[i] = rel[i] * y1[i];
        g_rel[i] += scale * y1[i] * y2[i];
      }
      return;
    case ModelKind::Bilinear:
      std::fill(dy2.begin(), dy2.end(), 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        auto row = rel.subspan(i * d, d);
        dy1[i] = dot(row, y2);
        for (std::size_t j = 0; j < d; ++j) {
          dy2[j] += row[j] * y1[i];
          g_rel[i * d + j] += scale * y1[i] * y2[j];
        }
      }
      return;
    case ModelKind::TransE:
      for (std::size_t i = 0; i < d; ++i) {
        dy1[i] = -2.0 * rel[i] + 2.0 * y2[i];
        dy2[i] = 2.0 * rel[i] + 2.0 * y1[i];
        g_rel[i] += scale * (-2.0 * (y1[i] - y2[i]) - 2.0 * rel[i]);
      }
      return;
    case ModelKind::BilinearLinear:
      for (std::size_t j = 0; j < d; ++j) dy2[j] = rel[L.linear_object + j];
      for (std::size_t i = 0; i < d; ++i) {
        auto row = rel.subspan(i * d, d);
        dy1[i] = dot(row, y2) + rel[L.linear_subject + i];
        for (std::size_t j = 0; j < d; ++j) {
          dy2[j] += row[j] * y1[i];
          g_rel[i * d + j] += scale * y1[i] * y2[j];
        }
        g_rel[L.linear_subject + i] += scale * y1[i];
        g_rel[L.linear_object + i] += scale * y2[i];
      }
      return;
    case ModelKind::Ntn: {
      const std::size_t k_slices = m.slices();
      std::fill(dy1.begin(), dy1.end(), 0.0);
      std::fill(dy2.begin(), dy2.end(), 0.0);
      for (std::size_t k = 0; k < k_slices; ++k) {
        auto T = rel.subspan(k * d * d, d * d);
        double z = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          z += y1[i] * dot(T.subspan(i * d, d), y2);
          z += rel[L.linear_subject + i * k_slices + k] * y1[i];
          z += rel[L.linear_object + i * k_slices + k] * y2[i];
        }
        const double h = std::tanh(z);
        const double c = rel[L.weights + k] * (1.0 - h * h);
        g_rel[L.weights + k] += scale * h;
        for (std::size_t i = 0; i < d; ++i) {
          auto row = T.subspan(i * d, d);
          dy1[i] += c * (dot(row, y2) + rel[L.linear_subject + i * k_slices + k]);
          dy2[i] += c * rel[L.linear_object + i * k_slices + k];
          for (std::size_t j = 0; j < d; ++j) {
            dy2[j] += c * row[j] * y1[i];
            g_rel[k * d * d + i * d + j] += scale * c * y1[i] * y2[j];
          }
          g_rel[L.linear_subject + i * k_slices + k] += scale * c * y1[i];
          g_rel[L.linear_object + i * k_slices + k] += scale * c * y2[i];
        }
      }
      return;
    }
  }
}

}  // namespace detail

// Reusable buffers for scoring/gradient calls; one per thread.
class Workspace {
 public:
  explicit Workspace(std::size_t dim) : y1_(dim), y2_(dim), dy1_(dim), dy2_(dim) {}

  double score(const Model& m, const Triple& t) {
    project_into(m, t.subject, y1_);
    project_into(m, t.object, y2_);
    return detail::score_projected(m, m.relation(t.relation), y1_, y2_);
  }

  // Adds scale * gradient of score(t) to the given rows. g_subject and
  // g_object may alias when subject == object.
  void accumulate_gradient(const Model& m, const Triple& t, double scale, std::span<double> g_subject,
                           std::span<double> g_object, std::span<double> g_relation) {
    project_into(m, t.subject, y1_);
    project_into(m, t.object, y2_);
    detail::backprop_projected(m, m.relation(t.relation), y1_, y2_, scale, dy1_, dy2_, g_relation);
    const bool tanh = m.projection() == Projection::Tanh;
    for (std::size_t i = 0; i < y1_.size(); ++i) {
      g_subject[i] += scale * dy1_[i] * (tanh ? 1.0 - y1_[i] * y1_[i] : 1.0);
    }
    for (std::size_t i = 0; i < y2_.size(); ++i) {
      g_object[i] += scale * dy2_[i] * (tanh ? 1.0 - y2_[i] * y2_[i] : 1.0);
    }
  }

 private:
  std::vector<double> y1_, y2_, dy1_, dy2_;
};

inline double score(const Model& m, const Triple& t) {
  Workspace ws(m.dim());
  return ws.score(m, t);
}

// Partial derivatives of score(t) w.r.t. the subject row, the object row and
// the relation block. With subject == object the two entity gradients are
// the partials for each argument position separately.
struct Gradient {
  std::vector<double> subject;
  std::vector<double> object;
  std::vector<double> relation;
};

enum class ParamBlock { Subject, Object, Relation };

inline Gradient grad(const Model& m, const Triple& t) {
  Gradient g{std::vector<double>(m.dim(), 0.0), std::vector<double>(m.dim(), 0.0),
             std::vector<double>(m.layout().size, 0.0)};
  Workspace ws(m.dim());
  ws.accumulate_gradient(m, t, 1.0, g.subject, g.object, g.relation);
  return g;
}

inline std::vector<double> grad(const Model& m, const Triple& t, ParamBlock block) {
  auto g = grad(m, t);
  switch (block) {
    case ParamBlock::Subject: return std::move(g.subject);
    case ParamBlock::Object: return std::move(g.object);
    default: return std::move(g.relation);
  }
}

enum class Slot : std::uint8_t { Subject = 0, Object = 1 };

// Scores every candidate entity for one (fixed entity, relation, open slot)
// query. All five models are, per tensor slice, affine in the candidate's
// projected vector: z_k = a_k . y + b_k; NTN combines slices as
// sum_k u_k tanh(z_k), the others use z_0 directly.
class CandidateForm {
 public:
  CandidateForm(const Model& m, RelationId r, std::span<const double> fixed, Slot open)
      : dim_(m.dim()), slices_(m.slices()), ntn_(m.kind() == ModelKind::Ntn) {
    const std::size_t d = dim_;
    const auto& L = m.layout();
    auto rel = m.relation(r);
    a_.assign(slices_ * d, 0.0);
    b_.assign(slices_, 0.0);
    const bool open_object = open == Slot::Object;
    switch (m.kind()) {
      case ModelKind::DistMult:
        for (std::size_t i = 0; i < d; ++i) a_[i] = rel[i] * fixed[i];
        break;
      case ModelKind::Bilinear:
      case ModelKind::BilinearLinear:
        for (std::size_t i = 0; i < d; ++i) {
          for (std::size_t j = 0; j < d; ++j) {
            if (open_object) {
              a_[j] += fixed[i] * rel[i * d + j];
            } else {
              a_[i] += rel[i * d + j] * fixed[j];
            }
          }
        }
        if (m.kind() == ModelKind::BilinearLinear) {
          auto q_fixed = rel.subspan(open_object ? L.linear_subject : L.linear_object, d);
          auto q_open = rel.subspan(open_object ? L.linear_object : L.linear_subject, d);
          for (std::size_t i = 0; i < d; ++i) a_[i] += q_open[i];
          b_[0] = dot(q_fixed, fixed);
        }
        break;
      case ModelKind::TransE: {
        auto V = rel.first(d);
        const double vv = squared_norm(V);
        const double vf = dot(V, fixed);
        // score = -2 V.y1 + 2 V.y2 + 2 y1.y2 - |V|^2
        for (std::size_t i = 0; i < d; ++i) a_[i] = (open_object ? 2.0 : -2.0) * V[i] + 2.0 * fixed[i];
        b_[0] = (open_object ? -2.0 : 2.0) * vf - vv;
        break;
      }
      case ModelKind::Ntn:
        weights_.assign(rel.begin() + L.weights, rel.begin() + L.weights + slices_);
        for (std::size_t k = 0; k < slices_; ++k) {
          auto T = rel.subspan(k * d * d, d * d);
          auto a = std::span<double>(a_).subspan(k * d, d);
          for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
              if (open_object) {
                a[j] += fixed[i] * T[i * d + j];
              } else {
                a[i] += T[i * d + j] * fixed[j];
              }
            }
          }
          const std::size_t q_fixed = open_object ? L.linear_subject : L.linear_object;
          const std::size_t q_open = open_object ? L.linear_object : L.linear_subject;
          for (std::size_t i = 0; i < d; ++i) {
            a[i] += rel[q_open + i * slices_ + k];
            b_[k] += rel[q_fixed + i * slices_ + k] * fixed[i];
          }
        }
        break;
    }
  }

  double operator()(std::span<const double> candidate) const {
    if (!ntn_) return dot(std::span<const double>(a_).first(dim_), candidate) + b_[0];
    double s = 0.0;
    for (std::size_t k = 0; k < slices_; ++k) {
      s += weights_[k] * std::tanh(dot(std::span<const double>(a_).subspan(k * dim_, dim_), candidate) + b_[k]);
    }
    return s;
  }

 private:
  std::size_t dim_, slices_;
  bool ntn_;
  std::vector<double> a_, b_, weights_;
};

// A relation embedding as used for composition: a vector (TransE V or the
// DistMult diagonal; cols == 1) or a square matrix (Bilinear M).
struct RelationEmbedding {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;

  friend bool operator==(const RelationEmbedding&, const RelationEmbedding&) = default;
};

inline bool composable(ModelKind k) {
  return k == ModelKind::TransE || k == ModelKind::DistMult || k == ModelKind::Bilinear;
}

inline RelationEmbedding relation_embedding(const Model& m, RelationId r) {
  if (!composable(m.kind())) {
    throw CapabilityError("relation composition is not defined for " + std::string(to_string(m.kind())));
  }
  auto rel = m.relation(r);
  const std::size_t d = m.dim();
  if (m.kind() == ModelKind::Bilinear) return {{rel.begin(), rel.end()}, d, d};
  return {{rel.begin(), rel.begin() + d}, d, 1};
}

namespace detail {

inline void compose_into(ModelKind kind, std::size_t d, const std::vector<double>& acc, std::span<const double> next,
                         std::vector<double>& out) {
  switch (kind) {
    case ModelKind::TransE:
      for (std::size_t i = 0; i < d; ++i) out[i] = acc[i] + next[i];
      return;
    case ModelKind::DistMult:
      for (std::size_t i = 0; i < d; ++i) out[i] = acc[i] * next[i];
      return;
    default:
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
          const double a = acc[i * d + k];
          if (a == 0.0) continue;
          for (std::size_t j = 0; j < d; ++j) out[i * d + j] += a * next[k * d + j];
        }
      }
      return;
  }
}

}  // namespace detail

// Composes relations along a path: sum of translation vectors (TransE),
// product of diagonals (DistMult), matrix product in path order (Bilinear).
inline RelationEmbedding compose_relations(const Model& m, std::span<const RelationId> path) {
  if (path.empty()) throw Error("cannot compose an empty relation sequence");
  auto acc = relation_embedding(m, path[0]);
  const std::size_t d = m.dim();
  std::vector<double> tmp(acc.values.size());
  for (std::size_t p = 1; p < path.size(); ++p) {
    auto next = m.relation(path[p]);
    detail::compose_into(m.kind(), d, acc.values, next, tmp);
    std::swap(acc.values, tmp);
  }
  return acc;
}

// Euclidean distance for vectors, Frobenius distance for matrices.
inline double relation_distance(const RelationEmbedding& a, const RelationEmbedding& b) {
  if (a.rows != b.rows || a.cols != b.cols || a.values.size() != b.values.size()) {
    throw DimensionError("relation embeddings differ in shape");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double diff = a.values[i] - b.values[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace embedrule
