#pragma once

#include "modesheaf/mode_system.hpp"

namespace modesheaf {

struct LawResult {
  std::string id;
  bool pass = true;
  long checked = 0;
  nlohmann::json witness;  // null when passing

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["id"] = id;
    j["status"] = pass ? "pass" : "fail";
    j["checked"] = checked;
    j["witness"] = witness;
    return j;
  }
};

struct LawReport {
  std::size_t probe_count = 0;
  std::vector<LawResult> laws;
  std::vector<std::string> caveats;

  bool all_pass() const {
    for (const auto& l : laws)
      if (!l.pass) return false;
    return true;
  }

  const LawResult* find(const std::string& id) const {
    for (const auto& l : laws)
      if (l.id == id) return &l;
    return nullptr;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["probe_count"] = probe_count;
    j["all_pass"] = all_pass();
    j["caveats"] = caveats;
    j["laws"] = nlohmann::json::array();
    for (const auto& l : laws) j["laws"].push_back(l.to_json());
    return j;
  }
};

namespace detail {

inline nlohmann::json state_json(const State& s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : s.items()) j[k] = v;
  return j;
}

inline bool states_close(const State& a, const State& b, double tol) {
  if (a.size() != b.size()) return false;
  for (const auto& [k, v] : a.items()) {
    if (!b.has(k)) return false;
    if (std::abs(v - b.at(k)) > tol) return false;
  }
  return true;
}

inline bool points_close(const BarycentricPoint& a, const BarycentricPoint& b,
                         double tol) {
  if (a.weights().size() != b.weights().size()) return false;
  for (std::size_t i = 0; i < a.weights().size(); ++i)
    if (std::abs(a.weights()[i] - b.weights()[i]) > tol) return false;
  return true;
}

inline nlohmann::json weights_json(const BarycentricPoint& p) {
  nlohmann::json j = nlohmann::json::object();
  const auto& labels = p.complex().vertices().labels();
  for (std::size_t i = 0; i < labels.size(); ++i) j[labels[i]] = p.weights()[i];
  return j;
}

}  // namespace detail

/// Check the sheaf laws of a mode system on the given probe states:
/// functoriality of inc and proj on chains, the one-sided round-trip
/// identity, compatibility of the local evaluators with the transition
/// maps, injectivity of inc, and the epsilon/pi margin that keeps the
/// round trip inside the proj domain. Sample-based: failures carry a
/// witness, passes certify the probes only.
inline LawReport validate_sheaf_laws(const ModeSystem& sys,
                                     const std::vector<State>& probes,
                                     double tol = 1e-9) {
  if (probes.empty()) fail(ErrorCode::NoProbes, "no probe states supplied");

  LawReport report;
  report.probe_count = probes.size();

  std::vector<Simplex> modes;
  for (const auto& [k, pkg] : sys.packages) modes.push_back(pkg.mode);

  auto probes_in = [&](const Simplex& mode) {
    std::vector<const State*> out;
    const Box& box = sys.package(mode).state_space;
    for (const auto& s : probes)
      if (box.contains(s)) out.push_back(&s);
    return out;
  };

  auto pair_json = [&](const Simplex& a, const Simplex& b, const State& s) {
    nlohmann::json j;
    j["from"] = mode_key(a);
    j["to"] = mode_key(b);
    j["state"] = detail::state_json(s);
    return j;
  };

  // (i) inc functoriality on chains X c Y c Z.
  LawResult inc_fun{"inc_functorial"};
  // (ii) proj functoriality on chains Z c Y c X.
  LawResult proj_fun{"proj_functorial"};
  // (iii) proj o inc = id on Dom(inc).
  LawResult round_trip{"round_trip_identity"};
  // (iv) phi compatibility with inc and proj on their domains within W_X.
  LawResult compat{"partition_compatibility"};
  // (v) injectivity of inc on probes.
  LawResult injective{"inc_injective"};
  // (vi) 1 - pi_X < eps_{Z->X}, so the round trip lands in Dom(proj).
  LawResult margin{"epsilon_pi_margin"};
  // partition axioms checked alongside the laws
  LawResult axioms{"partition_axioms"};

  for (const auto& X : modes) {
    const ModePackage& px = sys.package(X);
    auto in_x = probes_in(X);

    // partition axioms on this mode's probes
    for (const State* s : in_x) {
      ++axioms.checked;
      try {
        (void)px.phi->evaluate(*s);
      } catch (const ModelError& e) {
        if (axioms.pass) {
          axioms.pass = false;
          axioms.witness = {{"mode", mode_key(X)},
                            {"state", detail::state_json(*s)},
                            {"error", e.what()}};
        }
      }
    }

    for (const auto& Z : modes) {
      if (!X.strict_subset_of(Z)) continue;
      const ModePackage& pz = sys.package(Z);

      // (vi) margin inequality per inc-related pair
      ++margin.checked;
      double eps = sys.table.epsilon(Z, X);
      if (!(1.0 - px.pi < eps) && margin.pass) {
        margin.pass = false;
        margin.witness = {{"from", mode_key(Z)},
                          {"to", mode_key(X)},
                          {"epsilon", eps},
                          {"one_minus_pi", 1.0 - px.pi}};
      }

      std::vector<std::pair<const State*, State>> images;
      for (const State* s : in_x) {
        bool in_dom = false;
        try {
          in_dom = inc_domain_check(sys.table, px, Z, *s);
        } catch (const ModelError&) {
          continue;  // evaluation failure already witnessed by axioms
        }
        if (!in_dom) continue;
        State up = sys.table.inc_map(X, Z).apply(*s, pz.state_space);
        images.emplace_back(s, up);

        // (iii) round trip
        ++round_trip.checked;
        State back = sys.table.proj_map(Z, X).apply(up, px.state_space);
        if (!detail::states_close(*s, back, tol) && round_trip.pass) {
          round_trip.pass = false;
          round_trip.witness = pair_json(X, Z, *s);
          round_trip.witness["expected"] = detail::state_json(*s);
          round_trip.witness["actual"] = detail::state_json(back);
        }

        // (iv) phi_Z o inc = phi_X on Dom(inc) n W_X
        if (self_belief(px, *s) >= px.pi && pz.state_space.contains(up)) {
          ++compat.checked;
          try {
            BarycentricPoint here = px.phi->evaluate(*s);
            BarycentricPoint there = pz.phi->evaluate(up);
            if (!detail::points_close(here, there, tol) && compat.pass) {
              compat.pass = false;
              compat.witness = pair_json(X, Z, *s);
              compat.witness["expected"] = detail::weights_json(here);
              compat.witness["actual"] = detail::weights_json(there);
              compat.witness["direction"] = "inc";
            }
          } catch (const ModelError&) {
          }
        }
      }

      // (v) injectivity of inc on the mapped probes
      for (std::size_t i = 0; i < images.size(); ++i) {
        for (std::size_t j = i + 1; j < images.size(); ++j) {
          ++injective.checked;
          if (!detail::states_close(*images[i].first, *images[j].first, 1e-9) &&
              detail::states_close(images[i].second, images[j].second, 1e-12)) {
            if (injective.pass) {
              injective.pass = false;
              injective.witness = pair_json(X, Z, *images[i].first);
              injective.witness["collides_with"] = detail::state_json(*images[j].first);
              injective.witness["image"] = detail::state_json(images[i].second);
            }
          }
        }
      }
    }

    // proj-side checks from X down
    for (const auto& Y : modes) {
      if (!Y.strict_subset_of(X)) continue;
      const ModePackage& py = sys.package(Y);
      for (const State* s : in_x) {
        bool in_dom = false;
        try {
          in_dom = proj_domain_check(sys.table, px, Y, *s);
        } catch (const ModelError&) {
          continue;
        }
        if (!in_dom) continue;
        State down = sys.table.proj_map(X, Y).apply(*s, py.state_space);
        if (!py.state_space.contains(down)) continue;

        // (iv) phi_Y o proj = phi_X on Dom(proj) n W_X
        if (self_belief(px, *s) >= px.pi) {
          ++compat.checked;
          try {
            BarycentricPoint here = px.phi->evaluate(*s);
            BarycentricPoint there = py.phi->evaluate(down);
            if (!detail::points_close(here, there, tol) && compat.pass) {
              compat.pass = false;
              compat.witness = pair_json(X, Y, *s);
              compat.witness["expected"] = detail::weights_json(here);
              compat.witness["actual"] = detail::weights_json(there);
              compat.witness["direction"] = "proj";
            }
          } catch (const ModelError&) {
          }
        }
      }
    }
  }

  // (i)/(ii) functoriality over chains of three nested modes.
  for (const auto& X : modes) {
    for (const auto& Y : modes) {
      if (!X.strict_subset_of(Y)) continue;
      for (const auto& Z : modes) {
        if (!Y.strict_subset_of(Z)) continue;
        const ModePackage& px = sys.package(X);
        const ModePackage& py = sys.package(Y);
        const ModePackage& pz = sys.package(Z);

        for (const State* s : probes_in(X)) {
          // inc chain X -> Y -> Z vs X -> Z
          try {
            if (inc_domain_check(sys.table, px, Y, *s) &&
                inc_domain_check(sys.table, px, Z, *s)) {
              State via_y = sys.table.inc_map(X, Y).apply(*s, py.state_space);
              if (py.state_space.contains(via_y) &&
                  inc_domain_check(sys.table, py, Z, via_y)) {
                ++inc_fun.checked;
                State composed = sys.table.inc_map(Y, Z).apply(via_y, pz.state_space);
                State direct = sys.table.inc_map(X, Z).apply(*s, pz.state_space);
                if (!detail::states_close(composed, direct, tol) && inc_fun.pass) {
                  inc_fun.pass = false;
                  inc_fun.witness = pair_json(X, Z, *s);
                  inc_fun.witness["via"] = mode_key(Y);
                  inc_fun.witness["expected"] = detail::state_json(direct);
                  inc_fun.witness["actual"] = detail::state_json(composed);
                }
              }
            }
          } catch (const ModelError&) {
          }
        }

        for (const State* s : probes_in(Z)) {
          // proj chain Z -> Y -> X vs Z -> X
          try {
            if (proj_domain_check(sys.table, pz, Y, *s) &&
                proj_domain_check(sys.table, pz, X, *s)) {
              State via_y = sys.table.proj_map(Z, Y).apply(*s, py.state_space);
              if (py.state_space.contains(via_y) &&
                  proj_domain_check(sys.table, py, X, via_y)) {
                ++proj_fun.checked;
                State composed = sys.table.proj_map(Y, X).apply(via_y, px.state_space);
                State direct = sys.table.proj_map(Z, X).apply(*s, px.state_space);
                if (!detail::states_close(composed, direct, tol) && proj_fun.pass) {
                  proj_fun.pass = false;
                  proj_fun.witness = pair_json(Z, X, *s);
                  proj_fun.witness["via"] = mode_key(Y);
                  proj_fun.witness["expected"] = detail::state_json(direct);
                  proj_fun.witness["actual"] = detail::state_json(composed);
                }
              }
            }
          } catch (const ModelError&) {
          }
        }
      }
    }
  }

  report.laws = {inc_fun, proj_fun, round_trip, compat, injective, margin, axioms};
  for (const auto& pkg : sys.packages)
    if (pkg.second.phi && pkg.second.phi->cover()) {
      report.caveats.push_back("cover property checked on cover samples only");
      break;
    }
  return report;
}

}  // namespace modesheaf
