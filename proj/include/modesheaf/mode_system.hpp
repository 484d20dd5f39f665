#pragma once

#include "modesheaf/partition.hpp"

namespace modesheaf {

/// Confidence bands for a mode's belief in itself: Comfort at or above
/// kappa, Panic strictly below pi, GrowingCrisis between.
enum class Zone { Comfort, GrowingCrisis, Panic };

inline const char* zone_name(Zone z) {
  switch (z) {
    case Zone::Comfort: return "Comfort";
    case Zone::GrowingCrisis: return "GrowingCrisis";
    case Zone::Panic: return "Panic";
  }
  return "?";
}

/// Per-mode bundle: the mode simplex, its local state space, the local
/// calibration evaluator, the bound control algorithm and the comfort and
/// panic levels (0 < pi < kappa < 1).
struct ModePackage {
  Simplex mode;
  Box state_space;
  const PartitionOfUnity* phi = nullptr;
  std::string algorithm;
  double kappa = 0.9;
  double pi = 0.6;

  void validate() const {
    if (!(0.0 < pi && pi < kappa && kappa < 1.0))
      fail(ErrorCode::SchemaError, "mode " + mode_key(mode) +
                                       ": need 0 < pi < kappa < 1, got pi=" +
                                       std::to_string(pi) + " kappa=" + std::to_string(kappa));
  }
};

/// Partial state map between mode state spaces, declared as coordinate
/// assignments: rename with optional affine adjustment, or insert a
/// constant placeholder. Unassigned target coordinates are copied from a
/// same-named source coordinate; source coordinates without a target are
/// dropped.
class StateMap {
 public:
  struct Assign {
    std::string target;
    std::optional<std::string> from;  // source coordinate, affine-adjusted
    double scale = 1.0;
    double offset = 0.0;
    std::optional<double> value;  // constant placeholder
  };

  StateMap() = default;
  explicit StateMap(std::vector<Assign> assigns) : assigns_(std::move(assigns)) {}

  bool identity() const { return assigns_.empty(); }
  const std::vector<Assign>& assigns() const { return assigns_; }

  /// Map a state into the target box's coordinate frame. Coordinates the
  /// target box requires but neither the assignments nor the source
  /// provide are an error.
  State apply(const State& s, const Box& target_box) const {
    State out;
    std::set<std::string> assigned;
    for (const auto& a : assigns_) {
      double v;
      if (a.value) {
        v = *a.value;
      } else {
        std::string src = a.from ? *a.from : a.target;
        v = a.scale * s.at(src) + a.offset;
      }
      out.set(a.target, v);
      assigned.insert(a.target);
    }
    for (const auto& [coord, iv] : target_box.axes()) {
      if (assigned.count(coord)) continue;
      if (!s.has(coord))
        fail(ErrorCode::SchemaError, "transition map provides no value for '" + coord + "'");
      out.set(coord, s.at(coord));
    }
    return out;
  }

 private:
  std::vector<Assign> assigns_;
};

/// The inc/proj transition maps with their wiggle-room parameters.
/// Keys are "<from>-><to>" with '+'-joined sorted mode labels. Maps not
/// declared default to the identity on shared coordinates; epsilons not
/// declared default to `default_epsilon`.
class TransitionTable {
 public:
  static std::string key(const Simplex& from, const Simplex& to) {
    return mode_key(from) + "->" + mode_key(to);
  }

  void set_inc(const Simplex& sub, const Simplex& super, StateMap m) {
    if (!sub.strict_subset_of(super))
      fail(ErrorCode::NotASubset, "inc requires a strict subset pair");
    inc_[key(sub, super)] = std::move(m);
  }

  void set_proj(const Simplex& super, const Simplex& sub, StateMap m) {
    if (!sub.strict_subset_of(super))
      fail(ErrorCode::NotASubset, "proj requires a strict subset pair");
    proj_[key(super, sub)] = std::move(m);
  }

  void set_epsilon(const Simplex& from, const Simplex& to, double eps) {
    epsilon_[key(from, to)] = eps;
  }

  const StateMap& inc_map(const Simplex& sub, const Simplex& super) const {
    auto it = inc_.find(key(sub, super));
    return it == inc_.end() ? identity_ : it->second;
  }

  const StateMap& proj_map(const Simplex& super, const Simplex& sub) const {
    auto it = proj_.find(key(super, sub));
    return it == proj_.end() ? identity_ : it->second;
  }

  double epsilon(const Simplex& from, const Simplex& to) const {
    auto it = epsilon_.find(key(from, to));
    return it == epsilon_.end() ? default_epsilon_ : it->second;
  }

  double eta() const { return eta_; }
  void set_eta(double eta) { eta_ = eta; }
  double default_epsilon() const { return default_epsilon_; }
  void set_default_epsilon(double eps) { default_epsilon_ = eps; }
  double snap() const { return snap_; }
  void set_snap(double snap) { snap_ = snap; }

 private:
  std::map<std::string, StateMap> inc_;
  std::map<std::string, StateMap> proj_;
  std::map<std::string, double> epsilon_;
  StateMap identity_;
  double eta_ = 0.05;
  double default_epsilon_ = 0.05;
  double snap_ = kSnapTolerance;
};

/// A full mode system: the complex, one package per mode, and the
/// transition table.
struct ModeSystem {
  const Complex* complex = nullptr;
  std::map<std::string, ModePackage> packages;  // keyed by mode_key
  TransitionTable table;

  const ModePackage& package(const Simplex& mode) const {
    auto it = packages.find(mode_key(mode));
    if (it == packages.end())
      fail(ErrorCode::SchemaError, "no package for mode " + mode_key(mode));
    return it->second;
  }

  bool has_package(const Simplex& mode) const {
    return packages.count(mode_key(mode)) > 0;
  }
};

/// Belief of the package's own mode at the state, via the local evaluator.
inline double self_belief(const ModePackage& pkg, const State& s) {
  return belief(pkg.phi->evaluate(s), pkg.mode);
}

inline Zone comfort_zone_status(const ModePackage& pkg, const State& s) {
  if (!pkg.state_space.contains(s))
    fail(ErrorCode::OutOfStateSpace,
         "state " + s.to_string() + " outside S_" + mode_key(pkg.mode));
  double b = self_belief(pkg, s);
  if (b >= pkg.kappa) return Zone::Comfort;
  if (b < pkg.pi) return Zone::Panic;
  return Zone::GrowingCrisis;
}

/// Domain of proj from pkg.mode down to `target`: belief in the dropped
/// complement must be strictly below epsilon.
inline bool proj_domain_check(const TransitionTable& tt, const ModePackage& pkg,
                              const Simplex& target, const State& s) {
  if (!target.strict_subset_of(pkg.mode))
    fail(ErrorCode::NotASubset,
         mode_key(target) + " is not a strict subset of " + mode_key(pkg.mode));
  BarycentricPoint p = pkg.phi->evaluate(s);
  Simplex dropped = pkg.mode.minus(target);
  return belief(p, dropped) < tt.epsilon(pkg.mode, target);
}

/// Domain of inc from pkg.mode up to `target`: not in the panic zone,
/// the target's belief reaches the comfort level, and every added vertex
/// carries strictly positive weight (after snapping).
inline bool inc_domain_check(const TransitionTable& tt, const ModePackage& pkg,
                             const Simplex& target, const State& s) {
  (void)tt;
  if (!pkg.mode.strict_subset_of(target))
    fail(ErrorCode::NotASuperset,
         mode_key(target) + " is not a strict superset of " + mode_key(pkg.mode));
  BarycentricPoint p = pkg.phi->evaluate(s);
  if (belief(p, pkg.mode) < pkg.pi) return false;
  if (belief(p, target) < pkg.kappa) return false;
  Simplex added = target.minus(pkg.mode);
  for (const auto& l : added.members())
    if (!(p.weight(l) > 0.0)) return false;
  return true;
}

struct TransitionOutcome {
  enum class Status { OK, NotOK };
  enum class Reason { Identity, ToSuperset, ToSubset, Unrelated, DomainViolation };

  Status status = Status::OK;
  Reason reason = Reason::Identity;
  std::optional<Simplex> new_mode;
  std::optional<State> new_state;

  bool ok() const { return status == Status::OK; }
};

inline const char* reason_name(TransitionOutcome::Reason r) {
  using R = TransitionOutcome::Reason;
  switch (r) {
    case R::Identity: return "Identity";
    case R::ToSuperset: return "ToSuperset";
    case R::ToSubset: return "ToSubset";
    case R::Unrelated: return "Unrelated";
    case R::DomainViolation: return "DomainViolation";
  }
  return "?";
}

/// Transfer dispatcher. Identity requests succeed with no state change;
/// strict superset/subset requests succeed when the corresponding domain
/// check passes and the mapped state lands in the target state space;
/// incomparable targets and domain failures are reported, never thrown.
inline TransitionOutcome tran(const ModeSystem& sys, const Simplex& current,
                              const State& s, const Simplex& target) {
  using Status = TransitionOutcome::Status;
  using Reason = TransitionOutcome::Reason;
  const ModePackage& pkg = sys.package(current);

  if (target == current) {
    return {Status::OK, Reason::Identity, current, s};
  }
  if (current.strict_subset_of(target)) {
    if (!sys.complex->contains(target))
      return {Status::NotOK, Reason::DomainViolation, std::nullopt, std::nullopt};
    const ModePackage& tgt = sys.package(target);
    if (!inc_domain_check(sys.table, pkg, target, s))
      return {Status::NotOK, Reason::DomainViolation, std::nullopt, std::nullopt};
    State mapped = sys.table.inc_map(current, target).apply(s, tgt.state_space);
    if (!tgt.state_space.contains(mapped))
      return {Status::NotOK, Reason::DomainViolation, std::nullopt, std::nullopt};
    return {Status::OK, Reason::ToSuperset, target, mapped};
  }
  if (target.strict_subset_of(current)) {
    if (!sys.complex->contains(target))
      return {Status::NotOK, Reason::DomainViolation, std::nullopt, std::nullopt};
    const ModePackage& tgt = sys.package(target);
    if (!proj_domain_check(sys.table, pkg, target, s))
      return {Status::NotOK, Reason::DomainViolation, std::nullopt, std::nullopt};
    State mapped = sys.table.proj_map(current, target).apply(s, tgt.state_space);
    if (!tgt.state_space.contains(mapped))
      return {Status::NotOK, Reason::DomainViolation, std::nullopt, std::nullopt};
    return {Status::OK, Reason::ToSubset, target, mapped};
  }
  return {Status::NotOK, Reason::Unrelated, std::nullopt, std::nullopt};
}

enum class TransitionDirection { ToSuperset, ToSubset };

/// Zeno guard. Subset moves are allowed once the dropped weights have
/// reached zero (the outer boundary). Superset moves additionally require
/// every added weight to reach eta (the inner boundary), so that a path
/// bouncing on a face cannot switch modes on every crossing. With eta = 0
/// both directions share the boundary.
inline bool hysteresis_gate(const TransitionTable& tt, TransitionDirection direction,
                            const std::vector<double>& vertex_weights) {
  if (direction == TransitionDirection::ToSubset) {
    for (double w : vertex_weights)
      if (w > 0.0 && w >= tt.snap()) return false;
    return true;
  }
  for (double w : vertex_weights)
    if (w < tt.eta()) return false;
  return true;
}

/// Tracks the active mode along a sampled path of barycentric points,
/// applying the hysteresis gate. Subset moves target the strict support
/// (the smallest admissible simplex); superset moves add only vertices
/// whose weight has crossed eta.
class ModeTracker {
 public:
  ModeTracker(const Complex& complex, const TransitionTable& table, Simplex initial)
      : complex_(&complex), table_(&table), mode_(std::move(initial)) {
    if (!complex_->contains(mode_))
      fail(ErrorCode::SchemaError, "initial mode is not a simplex");
  }

  const Simplex& mode() const { return mode_; }
  long switches() const { return switches_; }

  /// Advance to the next sampled point; returns the modes entered, in
  /// order (a drop and a growth can both happen on one sample).
  std::vector<Simplex> feed(const BarycentricPoint& p) {
    std::vector<Simplex> entered;
    Simplex support = p.support();
    if (support == mode_) return entered;

    // Outer boundary: any vertex of the current mode whose weight reached
    // zero is dropped; the target is the strict support restricted to the
    // current mode.
    Simplex kept = mode_.intersect(support);
    if (kept != mode_ && !kept.empty()) {
      mode_ = kept;
      ++switches_;
      entered.push_back(mode_);
    }

    // Inner boundary: add the vertices that cleared eta.
    if (mode_ != support) {
      std::vector<Label> grown = mode_.members();
      bool any = false;
      Simplex missing = support.minus(mode_);
      for (const auto& l : missing.members()) {
        if (p.weight(l) >= table_->eta()) {
          grown.push_back(l);
          any = true;
        }
      }
      if (any) {
        Simplex next = Simplex(std::move(grown));
        if (complex_->contains(next)) {
          mode_ = next;
          ++switches_;
          entered.push_back(mode_);
        }
      }
    }

    // Degenerate jump: the sample shares no vertex with the current mode.
    if (mode_.intersect(support).empty()) {
      mode_ = support;
      ++switches_;
      entered.push_back(mode_);
    }
    return entered;
  }

 private:
  const Complex* complex_ = nullptr;
  const TransitionTable* table_ = nullptr;
  Simplex mode_;
  long switches_ = 0;
};

/// Admissible transfer targets from `current` at `s`: all comparable
/// modes whose domain check passes. The per-mode algorithm picks among
/// these; the engine does not choose for it.
inline std::vector<Simplex> admissible_targets(const ModeSystem& sys,
                                               const Simplex& current, const State& s) {
  std::vector<Simplex> out;
  const ModePackage& pkg = sys.package(current);
  for (const auto& sub : sys.complex->strict_subsets(current))
    if (proj_domain_check(sys.table, pkg, sub, s)) out.push_back(sub);
  for (const auto& super : sys.complex->strict_supersets(current))
    if (inc_domain_check(sys.table, pkg, super, s)) out.push_back(super);
  return out;
}

}  // namespace modesheaf
