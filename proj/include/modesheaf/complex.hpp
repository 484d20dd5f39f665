#pragma once

#include <map>
#include <set>

#include "modesheaf/core.hpp"

#include "json.hpp"

namespace modesheaf {

using Label = std::string;

/// Ordered set of distinct vertex labels (the basic-mode names). The
/// order is fixed at construction and used only for canonical
/// serialization and trace column layout, never for semantics.
class VertexSet {
 public:
  VertexSet() = default;
  explicit VertexSet(std::vector<Label> labels) : labels_(std::move(labels)) {
    std::set<Label> seen;
    for (const auto& l : labels_) {
      if (!seen.insert(l).second)
        fail(ErrorCode::SchemaError, "duplicate vertex label '" + l + "'");
    }
  }

  const std::vector<Label>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }

  bool contains(const Label& l) const {
    return std::find(labels_.begin(), labels_.end(), l) != labels_.end();
  }

  std::size_t index_of(const Label& l) const {
    auto it = std::find(labels_.begin(), labels_.end(), l);
    if (it == labels_.end()) fail(ErrorCode::UnknownVertex, "'" + l + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  bool operator==(const VertexSet& o) const { return labels_ == o.labels_; }

 private:
  std::vector<Label> labels_;
};

/// Finite set of vertex labels, kept sorted lexicographically. The empty
/// simplex is representable but is never a member of a Complex.
class Simplex {
 public:
  Simplex() = default;
  Simplex(std::initializer_list<Label> members)
      : Simplex(std::vector<Label>(members)) {}
  explicit Simplex(std::vector<Label> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  }

  const std::vector<Label>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

  bool contains(const Label& l) const {
    return std::binary_search(members_.begin(), members_.end(), l);
  }

  bool subset_of(const Simplex& o) const {
    return std::includes(o.members_.begin(), o.members_.end(), members_.begin(),
                         members_.end());
  }

  bool strict_subset_of(const Simplex& o) const {
    return size() < o.size() && subset_of(o);
  }

  Simplex unite(const Simplex& o) const {
    std::vector<Label> out;
    std::set_union(members_.begin(), members_.end(), o.members_.begin(),
                   o.members_.end(), std::back_inserter(out));
    return Simplex(std::move(out));
  }

  Simplex intersect(const Simplex& o) const {
    std::vector<Label> out;
    std::set_intersection(members_.begin(), members_.end(), o.members_.begin(),
                          o.members_.end(), std::back_inserter(out));
    return Simplex(std::move(out));
  }

  /// Members of this simplex not in `o`.
  Simplex minus(const Simplex& o) const {
    std::vector<Label> out;
    std::set_difference(members_.begin(), members_.end(), o.members_.begin(),
                        o.members_.end(), std::back_inserter(out));
    return Simplex(std::move(out));
  }

  bool operator==(const Simplex& o) const { return members_ == o.members_; }
  bool operator!=(const Simplex& o) const { return members_ != o.members_; }
  bool operator<(const Simplex& o) const { return members_ < o.members_; }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (i) s += ",";
      s += members_[i];
    }
    return s + "}";
  }

 private:
  std::vector<Label> members_;
};

/// Canonical key for a mode: '+'-joined sorted vertex labels.
inline std::string mode_key(const Simplex& s) {
  std::string out;
  for (std::size_t i = 0; i < s.members().size(); ++i) {
    if (i) out += "+";
    out += s.members()[i];
  }
  return out;
}

inline Simplex parse_mode_key(const std::string& key) {
  std::vector<Label> members;
  std::string cur;
  for (char c : key) {
    if (c == '+') {
      if (!cur.empty()) members.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) members.push_back(cur);
  return Simplex(std::move(members));
}

/// Downward-closed family of nonempty simplices over a vertex set. This
/// is the space of modes: every member simplex is a mode, singletons are
/// basic modes.
class Complex {
 public:
  Complex() = default;
  Complex(VertexSet vertices, std::set<Simplex> simplices)
      : vertices_(std::move(vertices)), simplices_(std::move(simplices)) {}

  const VertexSet& vertices() const { return vertices_; }
  const std::set<Simplex>& simplices() const { return simplices_; }

  bool contains(const Simplex& s) const { return simplices_.count(s) > 0; }

  std::vector<Simplex> maximal_simplices() const {
    std::vector<Simplex> out;
    for (const auto& s : simplices_) {
      bool maximal = true;
      for (const auto& t : simplices_) {
        if (s != t && s.subset_of(t)) {
          maximal = false;
          break;
        }
      }
      if (maximal) out.push_back(s);
    }
    return out;
  }

  /// Simplices comparable with `m`: strict subsets and strict supersets.
  std::vector<Simplex> strict_subsets(const Simplex& m) const {
    std::vector<Simplex> out;
    for (const auto& s : simplices_)
      if (s.strict_subset_of(m)) out.push_back(s);
    return out;
  }

  std::vector<Simplex> strict_supersets(const Simplex& m) const {
    std::vector<Simplex> out;
    for (const auto& s : simplices_)
      if (m.strict_subset_of(s)) out.push_back(s);
    return out;
  }

  bool operator==(const Complex& o) const {
    return vertices_ == o.vertices_ && simplices_ == o.simplices_;
  }

 private:
  VertexSet vertices_;
  std::set<Simplex> simplices_;
};

namespace detail {

/// All nonempty subsets of `gen`, inserted into `out`.
inline void insert_closure(const Simplex& gen, std::set<Simplex>& out) {
  const auto& m = gen.members();
  const std::size_t n = m.size();
  if (n > 20)
    fail(ErrorCode::SchemaError, "simplex too large to close: " + gen.to_string());
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<Label> subset;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) subset.push_back(m[i]);
    out.insert(Simplex(std::move(subset)));
  }
}

}  // namespace detail

/// Downward closure of the given generator simplices. Idempotent: closing
/// an already closed family returns the same family.
inline Complex make_complex(VertexSet vertices, const std::vector<Simplex>& generators) {
  std::set<Simplex> simplices;
  for (const auto& g : generators) {
    for (const auto& l : g.members()) {
      if (!vertices.contains(l))
        fail(ErrorCode::UnknownVertex,
             "generator " + g.to_string() + " mentions '" + l + "'");
    }
    if (g.empty()) continue;
    detail::insert_closure(g, simplices);
  }
  return Complex(std::move(vertices), std::move(simplices));
}

/// Vertex map between complexes. The map must be total on the source
/// vertex set; whether it is simplicial is checked separately.
class SimplicialMap {
 public:
  SimplicialMap() = default;
  SimplicialMap(Complex source, Complex target, std::map<Label, Label> vertex_map)
      : source_(std::move(source)),
        target_(std::move(target)),
        vertex_map_(std::move(vertex_map)) {}

  const Complex& source() const { return source_; }
  const Complex& target() const { return target_; }
  const std::map<Label, Label>& vertex_map() const { return vertex_map_; }

  Label apply(const Label& l) const {
    auto it = vertex_map_.find(l);
    if (it == vertex_map_.end())
      fail(ErrorCode::UnknownVertex, "vertex map undefined on '" + l + "'");
    return it->second;
  }

  Simplex image(const Simplex& s) const {
    std::vector<Label> out;
    out.reserve(s.size());
    for (const auto& l : s.members()) out.push_back(apply(l));
    return Simplex(std::move(out));
  }

 private:
  Complex source_;
  Complex target_;
  std::map<Label, Label> vertex_map_;
};

struct SimplicialCheck {
  bool ok = true;
  std::optional<Simplex> witness;  // source simplex whose image is not a simplex
};

/// True iff the image of every source simplex is a target simplex. On
/// failure the witness carries the offending source simplex.
inline SimplicialCheck check_simplicial(const SimplicialMap& m) {
  for (const auto& l : m.source().vertices().labels()) {
    (void)m.apply(l);  // totality
  }
  for (const auto& s : m.source().simplices()) {
    if (!m.target().contains(m.image(s))) return {false, s};
  }
  return {};
}

inline bool is_simplicial_map(const SimplicialMap& m) { return check_simplicial(m).ok; }

/// Label for a product vertex. '|' keeps pair labels usable as CSV column
/// names and inside '+'-joined mode keys.
inline Label pair_label(const Label& a, const Label& b) { return a + "|" + b; }

struct ProductComplex {
  Complex complex;
  SimplicialMap proj1;
  SimplicialMap proj2;
};

/// Categorical product: vertices are label pairs, and a set of pairs is a
/// simplex iff both coordinate projections are simplices of the factors.
inline ProductComplex product(const Complex& c1, const Complex& c2) {
  std::vector<Label> vertices;
  std::map<Label, Label> to_first, to_second;
  for (const auto& a : c1.vertices().labels()) {
    for (const auto& b : c2.vertices().labels()) {
      Label p = pair_label(a, b);
      vertices.push_back(p);
      to_first[p] = a;
      to_second[p] = b;
    }
  }

  // Closure of X x Y over all pairs of simplices; subsets of such a grid
  // are exactly the sets with simplex projections.
  std::set<Simplex> simplices;
  for (const auto& x : c1.simplices()) {
    for (const auto& y : c2.simplices()) {
      std::vector<Label> grid;
      grid.reserve(x.size() * y.size());
      for (const auto& a : x.members())
        for (const auto& b : y.members()) grid.push_back(pair_label(a, b));
      detail::insert_closure(Simplex(std::move(grid)), simplices);
    }
  }

  Complex prod(VertexSet(std::move(vertices)), std::move(simplices));
  SimplicialMap p1(prod, c1, std::move(to_first));
  SimplicialMap p2(prod, c2, std::move(to_second));
  return {std::move(prod), std::move(p1), std::move(p2)};
}

// --- canonical JSON form -------------------------------------------------
// { "vertices": [labels], "maximal_simplices": [[labels]] }
// Simplex member lists are sorted; the simplex list is sorted as well.

inline nlohmann::json complex_to_json(const Complex& c) {
  nlohmann::json j;
  j["vertices"] = c.vertices().labels();
  std::vector<std::vector<Label>> maximal;
  for (const auto& s : c.maximal_simplices()) maximal.push_back(s.members());
  std::sort(maximal.begin(), maximal.end());
  j["maximal_simplices"] = maximal;
  return j;
}

inline Complex complex_from_json(const nlohmann::json& j) {
  if (!j.contains("vertices") || !j.contains("maximal_simplices"))
    fail(ErrorCode::SchemaError, "complex JSON needs 'vertices' and 'maximal_simplices'");
  VertexSet vs(j.at("vertices").get<std::vector<Label>>());
  std::vector<Simplex> generators;
  for (const auto& arr : j.at("maximal_simplices"))
    generators.push_back(Simplex(arr.get<std::vector<Label>>()));
  return make_complex(std::move(vs), generators);
}

}  // namespace modesheaf
