#pragma once

#include "modesheaf/barycentric.hpp"
#include "modesheaf/cover.hpp"

namespace modesheaf {

/// One-dimensional piecewise-linear table. Between breakpoints the value
/// is interpolated; outside the breakpoint window it is either clamped to
/// the nearest endpoint value or zero (zero mode admits a jump at the
/// window edge).
class PiecewiseLinear {
 public:
  enum class Outside { Clamp, Zero };

  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<std::pair<double, double>> points,
                  Outside outside = Outside::Clamp)
      : pts_(std::move(points)), outside_(outside) {
    if (pts_.empty()) fail(ErrorCode::SchemaError, "empty breakpoint table");
    for (std::size_t i = 1; i < pts_.size(); ++i)
      if (pts_[i].first <= pts_[i - 1].first)
        fail(ErrorCode::SchemaError, "breakpoints must be strictly increasing");
  }

  double operator()(double x) const {
    if (x < pts_.front().first)
      return outside_ == Outside::Clamp ? pts_.front().second : 0.0;
    if (x > pts_.back().first)
      return outside_ == Outside::Clamp ? pts_.back().second : 0.0;
    for (std::size_t i = 1; i < pts_.size(); ++i) {
      if (x <= pts_[i].first) {
        const auto& [x0, y0] = pts_[i - 1];
        const auto& [x1, y1] = pts_[i];
        if (x == x0) return y0;
        if (x == x1) return y1;
        return y0 + (x - x0) * (y1 - y0) / (x1 - x0);
      }
    }
    return pts_.back().second;
  }

  const std::vector<std::pair<double, double>>& points() const { return pts_; }
  Outside outside() const { return outside_; }

 private:
  std::vector<std::pair<double, double>> pts_;
  Outside outside_ = Outside::Clamp;
};

/// Component function of a partition: a sum of terms, each a coefficient
/// times a product of piecewise-linear factors of named coordinates.
/// Declarative on purpose, so the validator can probe the axioms without
/// running arbitrary code.
struct PLFactor {
  std::string coord;
  PiecewiseLinear fn;
};

struct PLTerm {
  double coef = 1.0;
  std::vector<PLFactor> factors;
};

class ComponentFn {
 public:
  ComponentFn() = default;
  explicit ComponentFn(std::vector<PLTerm> terms) : terms_(std::move(terms)) {}

  /// Single-factor convenience.
  ComponentFn(std::string coord, PiecewiseLinear fn) {
    terms_.push_back(PLTerm{1.0, {PLFactor{std::move(coord), std::move(fn)}}});
  }

  double operator()(const State& s) const {
    double sum = 0.0;
    for (const auto& term : terms_) {
      double v = term.coef;
      for (const auto& f : term.factors) {
        if (v == 0.0) break;
        v *= f.fn(s.at(f.coord));
      }
      sum += v;
    }
    return sum;
  }

  const std::vector<PLTerm>& terms() const { return terms_; }

 private:
  std::vector<PLTerm> terms_;
};

/// Partition of unity over the vertices of a complex: one component
/// function per vertex, nonnegative and summing to 1 on every state.
/// An optional cover attaches the support condition, checked on the
/// cover's samples only.
class PartitionOfUnity {
 public:
  PartitionOfUnity() = default;
  PartitionOfUnity(const Complex& complex, std::vector<ComponentFn> components,
                   double snap = kSnapTolerance)
      : complex_(&complex), components_(std::move(components)), snap_(snap) {
    if (components_.size() != complex.vertices().size())
      fail(ErrorCode::SchemaError, "component count does not match vertex count");
  }

  const Complex& complex() const { return *complex_; }
  double snap() const { return snap_; }

  void attach_cover(Cover cover) { cover_ = std::move(cover); }
  const std::optional<Cover>& cover() const { return cover_; }

  /// Raw component values in vertex order, without snapping or checks.
  std::vector<double> raw_components(const State& s) const {
    std::vector<double> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(c(s));
    return out;
  }

  /// Calibrate a state against the modes. Throws PartitionAxiom if the
  /// components are negative or fail to sum to 1, SupportNotASimplex if
  /// the positive components do not form a simplex.
  BarycentricPoint evaluate(const State& s) const {
    return BarycentricPoint(*complex_, raw_components(s), snap_);
  }

  double component(const State& s, const Label& l) const {
    return evaluate(s).weight(l);
  }

  const ComponentFn& component_fn(const Label& l) const {
    return components_[complex_->vertices().index_of(l)];
  }

 private:
  const Complex* complex_ = nullptr;
  std::vector<ComponentFn> components_;
  std::optional<Cover> cover_;
  double snap_ = kSnapTolerance;
};

/// Rename the coordinates a partition reads, e.g. x -> x1 for the first
/// factor of a joint system.
inline ComponentFn rename_coords(const ComponentFn& fn,
                                 const std::map<std::string, std::string>& renames) {
  std::vector<PLTerm> terms = fn.terms();
  for (auto& t : terms) {
    for (auto& f : t.factors) {
      auto it = renames.find(f.coord);
      if (it != renames.end()) f.coord = it->second;
    }
  }
  return ComponentFn(std::move(terms));
}

namespace detail {

inline ComponentFn multiply_components(const ComponentFn& a, const ComponentFn& b) {
  std::vector<PLTerm> out;
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      PLTerm t;
      t.coef = ta.coef * tb.coef;
      t.factors = ta.factors;
      t.factors.insert(t.factors.end(), tb.factors.begin(), tb.factors.end());
      out.push_back(std::move(t));
    }
  }
  return ComponentFn(std::move(out));
}

}  // namespace detail

struct ProductPartition {
  Complex complex;  // product complex; owns the vertex set the partition indexes
  std::vector<ComponentFn> components;

  PartitionOfUnity partition(double snap = kSnapTolerance) const {
    return PartitionOfUnity(complex, components, snap);
  }
};

/// Product partition: component (a,i) is the product of the factors'
/// components, evaluated on the joint state. The factors must read
/// disjoint coordinate names (rename beforehand if needed). Marginals
/// over either index recover the factor partitions.
inline ProductPartition product_partition(const PartitionOfUnity& pu1,
                                          const PartitionOfUnity& pu2) {
  ProductComplex prod = product(pu1.complex(), pu2.complex());
  const auto& l1 = pu1.complex().vertices().labels();
  const auto& l2 = pu2.complex().vertices().labels();

  std::vector<ComponentFn> components(prod.complex.vertices().size());
  for (const auto& a : l1) {
    for (const auto& b : l2) {
      std::size_t idx = prod.complex.vertices().index_of(pair_label(a, b));
      components[idx] = detail::multiply_components(pu1.component_fn(a),
                                                    pu2.component_fn(b));
    }
  }
  return {std::move(prod.complex), std::move(components)};
}

// --- JSON ---------------------------------------------------------------
// Component spec, per vertex label. Single-factor shorthand:
//   { "coord": "x", "points": [[3.0,0.0],[5.0,1.0]], "outside": "clamp" }
// General form:
//   { "terms": [ { "coef": 1.0, "factors": [ <factor spec>... ] } ] }

inline PLFactor pl_factor_from_json(const nlohmann::json& j) {
  if (!j.contains("coord") || !j.contains("points"))
    fail(ErrorCode::SchemaError, "PL factor needs 'coord' and 'points'");
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : j.at("points")) {
    if (!p.is_array() || p.size() != 2)
      fail(ErrorCode::SchemaError, "breakpoint must be [x, y]");
    pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  std::string outside = j.value("outside", "clamp");
  PiecewiseLinear::Outside mode;
  if (outside == "clamp")
    mode = PiecewiseLinear::Outside::Clamp;
  else if (outside == "zero")
    mode = PiecewiseLinear::Outside::Zero;
  else
    fail(ErrorCode::SchemaError, "'outside' must be 'clamp' or 'zero'");
  return PLFactor{j.at("coord").get<std::string>(),
                  PiecewiseLinear(std::move(pts), mode)};
}

inline ComponentFn component_from_json(const nlohmann::json& j) {
  if (j.contains("coord")) {
    PLFactor f = pl_factor_from_json(j);
    return ComponentFn(f.coord, f.fn);
  }
  if (!j.contains("terms"))
    fail(ErrorCode::SchemaError, "component needs 'coord'/'points' or 'terms'");
  std::vector<PLTerm> terms;
  for (const auto& tj : j.at("terms")) {
    PLTerm t;
    t.coef = tj.value("coef", 1.0);
    for (const auto& fj : tj.at("factors")) t.factors.push_back(pl_factor_from_json(fj));
    terms.push_back(std::move(t));
  }
  return ComponentFn(std::move(terms));
}

/// Build a partition from its JSON block. Every complex vertex must have
/// a component entry.
inline PartitionOfUnity partition_from_json(const Complex& complex,
                                            const nlohmann::json& j,
                                            double snap = kSnapTolerance) {
  if (!j.contains("components"))
    fail(ErrorCode::SchemaError, "partition JSON needs 'components'");
  const auto& cj = j.at("components");
  std::vector<ComponentFn> components;
  for (const auto& l : complex.vertices().labels()) {
    if (!cj.contains(l))
      fail(ErrorCode::SchemaError, "partition missing component for vertex '" + l + "'");
    components.push_back(component_from_json(cj.at(l)));
  }
  return PartitionOfUnity(complex, std::move(components), snap);
}

// --- axiom validation -------------------------------------------------------

struct AxiomViolation {
  std::string kind;  // "negative_component" | "sum" | "support_not_simplex" | "support_outside_cover"
  State witness;
  std::string details;
};

struct PartitionAxiomReport {
  std::vector<AxiomViolation> violations;
  std::size_t probes_checked = 0;
  bool ok() const { return violations.empty(); }
};

/// Check the partition axioms on the given probe states, and the support
/// condition on cover samples when a cover is attached. Sample-based: a
/// clean report certifies the probes, not the whole space.
inline PartitionAxiomReport validate_partition(const PartitionOfUnity& pu,
                                               const std::vector<State>& probes) {
  PartitionAxiomReport report;
  const auto& labels = pu.complex().vertices().labels();

  auto check_state = [&](const State& s, bool support_condition) {
    std::vector<double> comps = pu.raw_components(s);
    double sum = 0.0;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (comps[i] < -pu.snap()) {
        report.violations.push_back(
            {"negative_component", s,
             labels[i] + " = " + std::to_string(comps[i])});
      }
      sum += comps[i];
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      report.violations.push_back({"sum", s, "components sum to " + std::to_string(sum)});
      return;
    }
    std::vector<Label> positive;
    for (std::size_t i = 0; i < comps.size(); ++i)
      if (comps[i] > pu.snap()) positive.push_back(labels[i]);
    Simplex support(positive);
    if (!support.empty() && !pu.complex().contains(support)) {
      report.violations.push_back(
          {"support_not_simplex", s, support.to_string() + " is not a simplex"});
    }
    if (support_condition && pu.cover()) {
      for (const auto& l : positive) {
        if (!pu.cover()->member(l, s))
          report.violations.push_back(
              {"support_outside_cover", s, l + " positive outside its cover set"});
      }
    }
  };

  for (const auto& s : probes) {
    check_state(s, false);
    ++report.probes_checked;
  }
  if (pu.cover()) {
    for (const auto& s : pu.cover()->samples()) {
      check_state(s, true);
      ++report.probes_checked;
    }
  }
  return report;
}

}  // namespace modesheaf
