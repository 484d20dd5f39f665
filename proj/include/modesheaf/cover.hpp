#pragma once

#include "modesheaf/complex.hpp"

namespace modesheaf {

/// Finite cover of a sampled space. The covered space itself is never
/// materialized: each set is an axis-aligned interval box, and the cover
/// property is checked on the supplied sample points only.
class Cover {
 public:
  Cover() = default;
  Cover(std::string ground_descriptor, std::vector<std::pair<Label, Box>> sets,
        std::vector<State> samples)
      : ground_(std::move(ground_descriptor)),
        sets_(std::move(sets)),
        samples_(std::move(samples)) {}

  const std::string& ground_descriptor() const { return ground_; }
  const std::vector<std::pair<Label, Box>>& sets() const { return sets_; }
  const std::vector<State>& samples() const { return samples_; }

  bool member(const Label& set_label, const State& s) const {
    for (const auto& [l, box] : sets_)
      if (l == set_label) return box.contains(s);
    fail(ErrorCode::UnknownVertex, "cover has no set '" + set_label + "'");
  }

  /// Labels of all sets containing the sample.
  Simplex star(const State& s) const {
    std::vector<Label> in;
    for (const auto& [l, box] : sets_)
      if (box.contains(s)) in.push_back(l);
    return Simplex(std::move(in));
  }

 private:
  std::string ground_;
  std::vector<std::pair<Label, Box>> sets_;
  std::vector<State> samples_;
};

/// Nerve of a cover: X is a simplex iff some sample lies in every set of
/// X. Downward closed by construction.
inline Complex nerve(const Cover& cover) {
  if (cover.sets().empty()) fail(ErrorCode::EmptyCover, "cover has no sets");
  if (cover.samples().empty()) fail(ErrorCode::EmptyCover, "cover has no samples");

  std::vector<Label> labels;
  for (const auto& [l, box] : cover.sets()) labels.push_back(l);
  VertexSet vertices(std::move(labels));

  std::set<Simplex> simplices;
  for (const auto& s : cover.samples()) {
    Simplex st = cover.star(s);
    if (st.empty())
      fail(ErrorCode::NotACover, "sample " + s.to_string() + " lies in no set");
    detail::insert_closure(st, simplices);
  }
  return Complex(std::move(vertices), std::move(simplices));
}

/// Nerve of the twofold cover {U_a n V_i}, computed on the shared sample
/// list. The result is a subcomplex of product(nerve(c1), nerve(c2)).
inline Complex intersection_nerve(const Cover& c1, const Cover& c2) {
  if (c1.samples().size() != c2.samples().size())
    fail(ErrorCode::SampleMismatch, "covers have different sample counts");
  for (std::size_t i = 0; i < c1.samples().size(); ++i) {
    if (!(c1.samples()[i] == c2.samples()[i]))
      fail(ErrorCode::SampleMismatch, "covers disagree at sample index " + std::to_string(i));
  }
  if (c1.sets().empty() || c2.sets().empty())
    fail(ErrorCode::EmptyCover, "cover has no sets");

  std::vector<Label> labels;
  for (const auto& [a, boxa] : c1.sets())
    for (const auto& [b, boxb] : c2.sets()) labels.push_back(pair_label(a, b));
  VertexSet vertices(std::move(labels));

  std::set<Simplex> simplices;
  for (const auto& s : c1.samples()) {
    Simplex star1 = c1.star(s);
    Simplex star2 = c2.star(s);
    if (star1.empty() || star2.empty())
      fail(ErrorCode::NotACover, "sample " + s.to_string() + " lies in no set");
    std::vector<Label> grid;
    for (const auto& a : star1.members())
      for (const auto& b : star2.members()) grid.push_back(pair_label(a, b));
    detail::insert_closure(Simplex(std::move(grid)), simplices);
  }
  return Complex(std::move(vertices), std::move(simplices));
}

// --- JSON ------------------------------------------------------------------
// { "ground": str, "samples": [ {coord: value} ],
//   "sets": { label: { coord: {"min":a,"max":b,"min_open":bool,"max_open":bool} } } }

inline Interval interval_from_json(const nlohmann::json& j) {
  Interval iv;
  iv.lo = j.value("min", -std::numeric_limits<double>::infinity());
  iv.hi = j.value("max", std::numeric_limits<double>::infinity());
  iv.lo_open = j.value("min_open", false);
  iv.hi_open = j.value("max_open", false);
  return iv;
}

inline nlohmann::json interval_to_json(const Interval& iv) {
  nlohmann::json j;
  j["min"] = iv.lo;
  j["max"] = iv.hi;
  if (iv.lo_open) j["min_open"] = true;
  if (iv.hi_open) j["max_open"] = true;
  return j;
}

inline Box box_from_json(const nlohmann::json& j) {
  Box box;
  for (auto it = j.begin(); it != j.end(); ++it)
    box.set(it.key(), interval_from_json(it.value()));
  return box;
}

inline nlohmann::json box_to_json(const Box& box) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, iv] : box.axes()) j[k] = interval_to_json(iv);
  return j;
}

inline Cover cover_from_json(const nlohmann::json& j) {
  if (!j.contains("sets") || !j.contains("samples"))
    fail(ErrorCode::SchemaError, "cover JSON needs 'sets' and 'samples'");
  std::vector<std::pair<Label, Box>> sets;
  for (auto it = j.at("sets").begin(); it != j.at("sets").end(); ++it)
    sets.emplace_back(it.key(), box_from_json(it.value()));
  std::vector<State> samples;
  for (const auto& rec : j.at("samples")) {
    State s;
    for (auto it = rec.begin(); it != rec.end(); ++it)
      s.set(it.key(), it.value().get<double>());
    samples.push_back(std::move(s));
  }
  return Cover(j.value("ground", ""), std::move(sets), std::move(samples));
}

}  // namespace modesheaf
