#include "modesheaf/laws.hpp"
#include "modesheaf/mode_system.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "fixture_helpers.hpp"

using namespace modesheaf;
using modesheaf::testing::racing_fixture;
using modesheaf::testing::RacingFixture;

namespace {

constexpr double kL = modesheaf::testing::kTrackKm;

State at_x(double frac, double v = 100.0) { return State{{"v", v}, {"x", frac * kL}}; }

std::vector<State> seeded_probes(const ModeSystem& sys, std::size_t per_mode,
                                 std::uint64_t seed = 404) {
  std::mt19937_64 rng(seed);
  std::vector<State> probes;
  for (const auto& [key, pkg] : sys.packages)
    for (std::size_t i = 0; i < per_mode; ++i)
      probes.push_back(pkg.state_space.sample(rng));
  return probes;
}

/// Mode system over a chain {a} < {a,b} < {a,b,c} with constant
/// evaluators and identity transition maps, for exercising the
/// functoriality laws on three nested modes.
struct ChainFixture {
  std::shared_ptr<const Complex> complex;
  std::shared_ptr<const PartitionOfUnity> phi;
  ModeSystem system;
};

ChainFixture chain_fixture() {
  ChainFixture f;
  f.complex = std::make_shared<const Complex>(
      make_complex(VertexSet({"a", "b", "c"}), {Simplex{"a", "b", "c"}}));
  // weights (0.5, 0.3, 0.2) everywhere: every mode pair's domains overlap
  std::vector<ComponentFn> comps;
  comps.emplace_back("u", PiecewiseLinear({{0.0, 0.5}, {1.0, 0.5}}));
  comps.emplace_back("u", PiecewiseLinear({{0.0, 0.3}, {1.0, 0.3}}));
  comps.emplace_back("u", PiecewiseLinear({{0.0, 0.2}, {1.0, 0.2}}));
  f.phi = std::make_shared<const PartitionOfUnity>(*f.complex, std::move(comps));
  f.system.complex = f.complex.get();
  Box box;
  box.set("u", Interval{0.0, 1.0});
  for (const Simplex& mode :
       {Simplex{"a"}, Simplex{"a", "b"}, Simplex{"a", "b", "c"}}) {
    ModePackage pkg;
    pkg.mode = mode;
    pkg.state_space = box;
    pkg.phi = f.phi.get();
    pkg.kappa = 0.4;  // own-mode beliefs are 0.5 / 0.8 / 1
    pkg.pi = 0.1;
    f.system.packages[mode_key(mode)] = pkg;
  }
  for (const Simplex& sub : {Simplex{"a"}, Simplex{"a", "b"}})
    for (const Simplex& super : {Simplex{"a", "b"}, Simplex{"a", "b", "c"}})
      if (sub.strict_subset_of(super)) f.system.table.set_epsilon(super, sub, 0.95);
  return f;
}

}  // namespace

TEST_CASE("comfort zone status") {
  RacingFixture f = racing_fixture();
  const ModePackage& straight = f.package("Str");

  SECTION("start of the straight is comfortable") {
    REQUIRE(comfort_zone_status(straight, at_x(0.0)) == Zone::Comfort);
  }

  SECTION("belief exactly at kappa counts as comfort") {
    // constant evaluator pinned to the kappa level
    auto complex = std::make_shared<const Complex>(
        make_complex(VertexSet({"p", "q"}), {Simplex{"p", "q"}}));
    std::vector<ComponentFn> comps;
    comps.emplace_back("u", PiecewiseLinear({{0.0, 0.9}, {1.0, 0.9}}));
    comps.emplace_back("u", PiecewiseLinear({{0.0, 0.1}, {1.0, 0.1}}));
    PartitionOfUnity flat(*complex, std::move(comps));
    ModePackage pkg;
    pkg.mode = Simplex{"p"};
    pkg.state_space.set("u", Interval{0.0, 1.0});
    pkg.phi = &flat;
    pkg.kappa = 0.9;
    pkg.pi = 0.6;
    REQUIRE(self_belief(pkg, State{{"u", 0.5}}) == 0.9);
    REQUIRE(comfort_zone_status(pkg, State{{"u", 0.5}}) == Zone::Comfort);
  }

  SECTION("mid-blend is a growing crisis") {
    REQUIRE(comfort_zone_status(straight, at_x(0.45)) == Zone::GrowingCrisis);
  }

  SECTION("belief below pi is panic") {
    REQUIRE(comfort_zone_status(straight, at_x(0.55)) == Zone::Panic);
  }

  SECTION("states outside the state space are rejected") {
    REQUIRE_THROWS_MATCHES(
        comfort_zone_status(straight, at_x(0.8)), ModelError,
        Catch::Matchers::Predicate<ModelError>([](const ModelError& e) {
          return e.code() == ErrorCode::OutOfStateSpace;
        }));
  }

  SECTION("monotone in belief along the straight") {
    Zone prev = Zone::Comfort;
    auto rank = [](Zone z) {
      return z == Zone::Comfort ? 0 : z == Zone::GrowingCrisis ? 1 : 2;
    };
    for (int i = 0; i <= 700; ++i) {
      Zone z = comfort_zone_status(straight, at_x(i * 0.001));
      REQUIRE(rank(z) >= rank(prev));  // belief only decreases along x
      prev = z;
    }
  }
}

TEST_CASE("proj domain check") {
  RacingFixture f = racing_fixture(/*epsilon=*/0.1);
  const ModePackage& joint = f.package("Cu+Str");

  SECTION("early joint states can project back to the straight") {
    REQUIRE(proj_domain_check(f.system.table, joint, Simplex{"Str"}, at_x(0.3)));
  }

  SECTION("the interval boundary is excluded (strict inequality)") {
    // phi_Cu reaches epsilon at x = (3 + 2 eps)/8 L = 0.4 L
    REQUIRE(!proj_domain_check(f.system.table, joint, Simplex{"Str"}, at_x(0.4)));
  }

  SECTION("the mode itself is not a strict subset") {
    REQUIRE_THROWS_MATCHES(
        proj_domain_check(f.system.table, joint, joint.mode, at_x(0.3)), ModelError,
        Catch::Matchers::Predicate<ModelError>(
            [](const ModelError& e) { return e.code() == ErrorCode::NotASubset; }));
  }
}

TEST_CASE("inc domain check") {
  RacingFixture f = racing_fixture();
  const ModePackage& straight = f.package("Str");
  const Simplex joint{"Str", "Cu"};

  SECTION("mid-transition states admit the superset") {
    REQUIRE(inc_domain_check(f.system.table, straight, joint, at_x(0.45)));
  }

  SECTION("panic zone blocks the move") {
    // phi_Str(0.5 L) = 0.5 < pi = 0.6
    REQUIRE(!inc_domain_check(f.system.table, straight, joint, at_x(0.5)));
  }

  SECTION("no justification for the new vertex blocks the move") {
    // phi_Cu(0.2 L) = 0
    REQUIRE(!inc_domain_check(f.system.table, straight, joint, at_x(0.2)));
  }

  SECTION("the mode itself is not a strict superset") {
    REQUIRE_THROWS_MATCHES(
        inc_domain_check(f.system.table, straight, straight.mode, at_x(0.3)),
        ModelError,
        Catch::Matchers::Predicate<ModelError>(
            [](const ModelError& e) { return e.code() == ErrorCode::NotASuperset; }));
  }
}

TEST_CASE("transition domain intervals match the closed forms") {
  // eps = 0.1, pi = 0.6 for both basic modes; grid scan at L / 2000
  RacingFixture f = racing_fixture(0.1, 0.6, 0.9);
  const ModePackage& joint = f.package("Cu+Str");
  const ModePackage& straight = f.package("Str");
  const ModePackage& curve = f.package("Cu");

  long mismatches = 0;
  const long n = 2000;
  for (long i = 0; i <= n; ++i) {
    double x = static_cast<double>(i) * kL / static_cast<double>(n);
    State s{{"v", 60.0}, {"x", x}};
    // proj {Str,Cu} -> {Str}: (L/4, (3+2e)/8 L) = (1/4, 2/5) L
    bool impl = joint.state_space.contains(s) &&
                proj_domain_check(f.system.table, joint, Simplex{"Str"}, s);
    bool oracle = (4 * i > n) && (5 * i < 2 * n);
    if (impl != oracle) ++mismatches;
    // proj {Str,Cu} -> {Cu}: ((5-2e)/8 L, 3/4 L) = (3/5, 3/4) L
    impl = joint.state_space.contains(s) &&
           proj_domain_check(f.system.table, joint, Simplex{"Cu"}, s);
    oracle = (5 * i > 3 * n) && (4 * i < 3 * n);
    if (impl != oracle) ++mismatches;
    // inc {Str} -> {Str,Cu}: (3/8 L, (5-2pi)/8 L] = (3/8, 19/40] L
    impl = straight.state_space.contains(s) &&
           inc_domain_check(f.system.table, straight, joint.mode, s);
    oracle = (8 * i > 3 * n) && (40 * i <= 19 * n);
    if (impl != oracle) ++mismatches;
    // inc {Cu} -> {Str,Cu}: [(3+2pi)/8 L, 5/8 L) = [21/40, 5/8) L
    impl = curve.state_space.contains(s) &&
           inc_domain_check(f.system.table, curve, joint.mode, s);
    oracle = (40 * i >= 21 * n) && (8 * i < 5 * n);
    if (impl != oracle) ++mismatches;
  }
  REQUIRE(mismatches == 0);
}

TEST_CASE("tran dispatcher") {
  RacingFixture f = racing_fixture();

  SECTION("identity request succeeds without a state change") {
    TransitionOutcome out = tran(f.system, Simplex{"Str"}, at_x(0.2), Simplex{"Str"});
    REQUIRE(out.ok());
    REQUIRE(out.reason == TransitionOutcome::Reason::Identity);
    REQUIRE(*out.new_state == at_x(0.2));
  }

  SECTION("superset request carries the state through the inclusion map") {
    TransitionOutcome out =
        tran(f.system, Simplex{"Str"}, at_x(0.45), Simplex{"Str", "Cu"});
    REQUIRE(out.ok());
    REQUIRE(out.reason == TransitionOutcome::Reason::ToSuperset);
    REQUIRE(*out.new_mode == Simplex{"Str", "Cu"});
    REQUIRE(out.new_state->at("x") == 0.45 * kL);
  }

  SECTION("subset request applies proj") {
    TransitionOutcome out =
        tran(f.system, Simplex{"Str", "Cu"}, at_x(0.7), Simplex{"Cu"});
    REQUIRE(out.ok());
    REQUIRE(out.reason == TransitionOutcome::Reason::ToSubset);
    REQUIRE(out.new_state->at("x") == 0.7 * kL);
  }

  SECTION("incomparable modes are refused") {
    TransitionOutcome out = tran(f.system, Simplex{"Str"}, at_x(0.3), Simplex{"Cu"});
    REQUIRE(!out.ok());
    REQUIRE(out.reason == TransitionOutcome::Reason::Unrelated);
  }

  SECTION("domain violations are reported, not thrown") {
    TransitionOutcome out =
        tran(f.system, Simplex{"Str"}, at_x(0.2), Simplex{"Str", "Cu"});
    REQUIRE(!out.ok());
    REQUIRE(out.reason == TransitionOutcome::Reason::DomainViolation);
  }

  SECTION("never OK for incomparable modes, and superset grants are justified") {
    std::mt19937_64 rng(515);
    std::vector<Simplex> modes = {Simplex{"Str"}, Simplex{"Cu"}, Simplex{"Str", "Cu"}};
    std::uniform_int_distribution<std::size_t> pick(0, modes.size() - 1);
    for (int trial = 0; trial < 500; ++trial) {
      const Simplex& from = modes[pick(rng)];
      const Simplex& to = modes[pick(rng)];
      const ModePackage& pkg = f.system.package(from);
      State s = pkg.state_space.sample(rng);
      TransitionOutcome out = tran(f.system, from, s, to);
      bool comparable =
          from == to || from.strict_subset_of(to) || to.strict_subset_of(from);
      if (!comparable) {
        REQUIRE(!out.ok());
        REQUIRE(out.reason == TransitionOutcome::Reason::Unrelated);
      }
      if (out.ok() && out.reason == TransitionOutcome::Reason::ToSuperset) {
        BarycentricPoint p = pkg.phi->evaluate(s);
        Simplex added = to.minus(from);
        for (const auto& l : added.members()) REQUIRE(p.weight(l) > 0.0);
        REQUIRE(belief(p, to) >= pkg.kappa);
      }
    }
  }

  SECTION("proj after inc is the identity on the inc domain") {
    std::mt19937_64 rng(616);
    const ModePackage& straight = f.package("Str");
    int checked = 0;
    while (checked < 50) {
      State s = straight.state_space.sample(rng);
      if (!inc_domain_check(f.system.table, straight, Simplex{"Str", "Cu"}, s)) continue;
      TransitionOutcome up = tran(f.system, Simplex{"Str"}, s, Simplex{"Str", "Cu"});
      REQUIRE(up.ok());
      TransitionOutcome down =
          tran(f.system, Simplex{"Str", "Cu"}, *up.new_state, Simplex{"Str"});
      REQUIRE(down.ok());
      REQUIRE(down.new_state->at("x") == s.at("x"));
      REQUIRE(down.new_state->at("v") == s.at("v"));
      ++checked;
    }
  }
}

TEST_CASE("state maps") {
  Box target;
  target.set("y", Interval{0.0, 10.0});
  target.set("w", Interval{0.0, 1.0});

  SECTION("rename with affine adjustment and a placeholder insert") {
    StateMap m(std::vector<StateMap::Assign>{
        {"y", std::string("x"), 2.0, 1.0, std::nullopt},
        {"w", std::nullopt, 1.0, 0.0, 0.25},
    });
    State out = m.apply(State{{"x", 3.0}, {"junk", 9.0}}, target);
    REQUIRE(out.at("y") == 7.0);
    REQUIRE(out.at("w") == 0.25);
    REQUIRE(!out.has("junk"));  // unmapped source coordinates are dropped
  }

  SECTION("identity copies the coordinates the target needs") {
    StateMap id;
    Box box;
    box.set("x", Interval{0.0, 8.0});
    State out = id.apply(State{{"x", 2.0}, {"v", 100.0}}, box);
    REQUIRE(out.at("x") == 2.0);
    REQUIRE(!out.has("v"));
  }

  SECTION("missing coordinates are an error") {
    StateMap id;
    REQUIRE_THROWS_AS(id.apply(State{{"x", 2.0}}, target), ModelError);
  }
}

TEST_CASE("hysteresis gate") {
  TransitionTable tt;
  tt.set_eta(0.05);

  SECTION("superset request below the inner line is rejected") {
    REQUIRE(!hysteresis_gate(tt, TransitionDirection::ToSuperset, {0.02}));
    REQUIRE(hysteresis_gate(tt, TransitionDirection::ToSuperset, {0.05}));
  }

  SECTION("subset request on the outer boundary is allowed") {
    REQUIRE(hysteresis_gate(tt, TransitionDirection::ToSubset, {0.0}));
    REQUIRE(!hysteresis_gate(tt, TransitionDirection::ToSubset, {0.02}));
  }

  SECTION("eta = 0 shares the boundary between directions") {
    TransitionTable flat;
    flat.set_eta(0.0);
    REQUIRE(hysteresis_gate(flat, TransitionDirection::ToSuperset, {1e-7}));
    REQUIRE(hysteresis_gate(flat, TransitionDirection::ToSubset, {0.0}));
  }
}

namespace {

/// Bouncing path on the {alpha, beta} face: c peaks at a * r^k with
/// touches of c = 0 in between.
std::vector<BarycentricPoint> bouncing_path(const Complex& tri, double a, double r,
                                            int oscillations) {
  std::vector<BarycentricPoint> points;
  auto push = [&](double c) {
    points.emplace_back(tri, std::vector<double>{(1 - c) / 2, (1 - c) / 2, c}, 0.0);
  };
  double amp = a;
  for (int k = 0; k < oscillations; ++k) {
    push(amp);
    push(0.0);
    amp *= r;
  }
  return points;
}

/// Independent crossing-count oracle: walks the c-coordinate sequence with
/// the two-threshold rule and counts the level crossings directly.
long crossing_count(const std::vector<double>& c_values, double eta, double snap) {
  bool high = c_values.front() > 0.0;  // starts in the full triangle
  long crossings = 0;
  for (double c : c_values) {
    if (high && c < std::max(snap, 1e-300)) {
      high = false;
      ++crossings;
    } else if (!high && c >= std::max(eta, snap)) {
      high = true;
      ++crossings;
    }
  }
  return crossings;
}

}  // namespace

TEST_CASE("mode tracker implements the Zeno guard") {
  Complex tri = make_complex(VertexSet({"alpha", "beta", "gamma"}),
                             {Simplex{"alpha", "beta", "gamma"}});
  auto run_tracker = [&](double eta, const std::vector<BarycentricPoint>& path) {
    TransitionTable tt;
    tt.set_eta(eta);
    ModeTracker tracker(tri, tt, path.front().support());
    for (const auto& p : path) tracker.feed(p);
    return tracker.switches();
  };

  std::vector<BarycentricPoint> path = bouncing_path(tri, 0.2, 0.5, 12);
  std::vector<double> c_values;
  for (const auto& p : path) c_values.push_back(p.weight("gamma"));

  SECTION("eta = 0 switches on every crossing") {
    long switches = run_tracker(0.0, path);
    REQUIRE(switches >= 12);
    REQUIRE(switches == crossing_count(c_values, 0.0, kSnapTolerance));
  }

  SECTION("eta = 0.05 bounds the number of switches") {
    long switches = run_tracker(0.05, path);
    long bound = 2 * static_cast<long>(std::ceil(std::log2(0.2 / 0.05))) + 2;
    REQUIRE(switches <= bound);  // = 6
    REQUIRE(switches == crossing_count(c_values, 0.05, kSnapTolerance));
  }

  SECTION("switch counts track the crossing oracle across damping rates") {
    std::mt19937_64 rng(717);
    std::uniform_real_distribution<double> amp(0.05, 0.4);
    std::uniform_real_distribution<double> ratio(0.3, 0.9);
    for (int trial = 0; trial < 25; ++trial) {
      double a = amp(rng), r = ratio(rng);
      std::vector<BarycentricPoint> p = bouncing_path(tri, a, r, 10);
      std::vector<double> c;
      for (const auto& q : p) c.push_back(q.weight("gamma"));
      for (double eta : {0.0, 0.02, 0.1}) {
        REQUIRE(run_tracker(eta, p) == crossing_count(c, eta, kSnapTolerance));
      }
    }
  }

  SECTION("incomparable jumps decompose into a drop and a growth") {
    TransitionTable tt;
    tt.set_eta(0.0);
    ModeTracker tracker(tri, tt, Simplex{"alpha", "beta"});
    std::vector<Simplex> entered =
        tracker.feed(BarycentricPoint(tri, {0.5, 0.0, 0.5}, 0.0));
    REQUIRE(entered.size() == 2);
    REQUIRE(entered.front() == Simplex{"alpha"});
    REQUIRE(entered.back() == Simplex{"alpha", "gamma"});
    REQUIRE(tracker.mode() == Simplex{"alpha", "gamma"});
  }
}

TEST_CASE("sheaf law validation") {
  SECTION("racing system passes all law families") {
    RacingFixture f = racing_fixture();  // epsilon = 0.5 > 1 - pi = 0.4
    LawReport report = validate_sheaf_laws(f.system, seeded_probes(f.system, 80));
    INFO(report.to_json().dump(2));
    REQUIRE(report.all_pass());
    REQUIRE(report.laws.size() == 7);
    REQUIRE(report.find("round_trip_identity")->checked > 0);
    REQUIRE(report.find("partition_compatibility")->checked > 0);
    REQUIRE(report.find("epsilon_pi_margin")->checked == 2);
  }

  SECTION("a corrupted proj map fails the round-trip law with a witness") {
    RacingFixture f = racing_fixture();
    f.system.table.set_proj(Simplex{"Str", "Cu"}, Simplex{"Str"},
                            StateMap(std::vector<StateMap::Assign>{
                                {"x", std::string("x"), 1.0, 0.01 * kL, std::nullopt}}));
    LawReport report = validate_sheaf_laws(f.system, seeded_probes(f.system, 80));
    const LawResult* law = report.find("round_trip_identity");
    REQUIRE(!law->pass);
    REQUIRE(!law->witness.is_null());
    REQUIRE(law->witness.contains("state"));
  }

  SECTION("epsilon not exceeding 1 - pi fails the margin law") {
    RacingFixture f = racing_fixture(/*epsilon=*/0.1);  // 1 - pi = 0.4 >= 0.1
    LawReport report = validate_sheaf_laws(f.system, seeded_probes(f.system, 20));
    const LawResult* law = report.find("epsilon_pi_margin");
    REQUIRE(!law->pass);
    REQUIRE(law->witness.at("epsilon").get<double>() == 0.1);
  }

  SECTION("a non-injective inc map is caught") {
    RacingFixture f = racing_fixture();
    // collapse every state to one point: wildly non-injective
    f.system.table.set_inc(Simplex{"Str"}, Simplex{"Str", "Cu"},
                           StateMap(std::vector<StateMap::Assign>{
                               {"x", std::nullopt, 1.0, 0.0, 0.45 * kL},
                               {"v", std::nullopt, 1.0, 0.0, 60.0}}));
    LawReport report = validate_sheaf_laws(f.system, seeded_probes(f.system, 80));
    REQUIRE(!report.find("inc_injective")->pass);
  }

  SECTION("functoriality holds on a three-mode chain with identity maps") {
    ChainFixture f = chain_fixture();
    LawReport report = validate_sheaf_laws(f.system, seeded_probes(f.system, 40));
    INFO(report.to_json().dump(2));
    REQUIRE(report.all_pass());
    REQUIRE(report.find("inc_functorial")->checked > 0);
    REQUIRE(report.find("proj_functorial")->checked > 0);
  }

  SECTION("a corrupted middle inc breaks functoriality with a witness") {
    ChainFixture f = chain_fixture();
    f.system.table.set_inc(Simplex{"a", "b"}, Simplex{"a", "b", "c"},
                           StateMap(std::vector<StateMap::Assign>{
                               {"u", std::string("u"), 1.0, 0.001, std::nullopt}}));
    LawReport report = validate_sheaf_laws(f.system, seeded_probes(f.system, 40));
    REQUIRE(!report.find("inc_functorial")->pass);
  }

  SECTION("zero probes are rejected") {
    RacingFixture f = racing_fixture();
    REQUIRE_THROWS_MATCHES(
        validate_sheaf_laws(f.system, {}), ModelError,
        Catch::Matchers::Predicate<ModelError>(
            [](const ModelError& e) { return e.code() == ErrorCode::NoProbes; }));
  }

  SECTION("report serializes with status and witnesses per law") {
    RacingFixture f = racing_fixture();
    LawReport report = validate_sheaf_laws(f.system, seeded_probes(f.system, 10));
    nlohmann::json j = report.to_json();
    REQUIRE(j.at("probe_count").get<std::size_t>() == 30);
    REQUIRE(j.at("laws").size() == 7);
    for (const auto& law : j.at("laws")) {
      REQUIRE(law.contains("id"));
      REQUIRE(law.contains("status"));
      REQUIRE(law.contains("checked"));
    }
  }
}

TEST_CASE("admissible targets expose the dispatcher's view") {
  RacingFixture f = racing_fixture();
  std::vector<Simplex> targets =
      admissible_targets(f.system, Simplex{"Str"}, at_x(0.45));
  REQUIRE(targets == std::vector<Simplex>{Simplex{"Cu", "Str"}});
  REQUIRE(admissible_targets(f.system, Simplex{"Str"}, at_x(0.1)).empty());
}
