#pragma once

// Shared builders for the racing-track fixtures used across test suites.

#include <memory>

#include "modesheaf/mode_system.hpp"

namespace modesheaf::testing {

inline constexpr double kTrackKm = 8.0;  // L

/// Complex {{Str},{Cu},{Str,Cu}}.
inline Complex racing_complex() {
  return make_complex(VertexSet({"Str", "Cu"}), {Simplex{"Str", "Cu"}});
}

/// The curve weight: 0 up to 3L/8, linear to 1 at 5L/8, constant outside.
inline PiecewiseLinear curve_ramp(double L = kTrackKm) {
  return PiecewiseLinear({{3.0 * L / 8.0, 0.0}, {5.0 * L / 8.0, 1.0}});
}

inline PiecewiseLinear straight_ramp(double L = kTrackKm) {
  return PiecewiseLinear({{3.0 * L / 8.0, 1.0}, {5.0 * L / 8.0, 0.0}});
}

/// Owns the complex, the partition over it, and the mode system, so the
/// internal pointers stay valid while the fixture is alive.
struct RacingFixture {
  std::shared_ptr<const Complex> complex;
  std::shared_ptr<const PartitionOfUnity> phi;
  ModeSystem system;

  const ModePackage& package(const std::string& key) const {
    return system.packages.at(key);
  }
};

inline Box speed_position_box(double x_lo, double x_hi, bool lo_open, bool hi_open,
                              double L = kTrackKm) {
  Box b;
  b.set("v", Interval{0.0, 120.0});
  b.set("x", Interval{x_lo * L, x_hi * L, lo_open, hi_open});
  return b;
}

/// Single-car mode system with the standard state spaces and thresholds.
/// All transition maps are coordinate identities.
inline RacingFixture racing_fixture(double epsilon = 0.5, double pi = 0.6,
                                    double kappa = 0.9, double L = kTrackKm) {
  RacingFixture f;
  f.complex = std::make_shared<const Complex>(racing_complex());
  std::vector<ComponentFn> comps(2);
  const auto& labels = f.complex->vertices().labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    comps[i] = labels[i] == "Cu" ? ComponentFn("x", curve_ramp(L))
                                 : ComponentFn("x", straight_ramp(L));
  }
  f.phi = std::make_shared<const PartitionOfUnity>(*f.complex, std::move(comps));

  f.system.complex = f.complex.get();
  auto add = [&](Simplex mode, Box box, const std::string& algo) {
    ModePackage pkg;
    pkg.mode = std::move(mode);
    pkg.state_space = std::move(box);
    pkg.phi = f.phi.get();
    pkg.algorithm = algo;
    pkg.kappa = kappa;
    pkg.pi = pi;
    pkg.validate();
    f.system.packages[mode_key(pkg.mode)] = std::move(pkg);
  };
  add(Simplex{"Str"}, speed_position_box(0.0, 0.75, false, true, L), "full_throttle");
  add(Simplex{"Str", "Cu"}, speed_position_box(0.25, 0.75, true, true, L),
      "blend_slowdown");
  add(Simplex{"Cu"}, speed_position_box(0.25, 1.0, true, false, L), "curve_hold");

  Simplex joint{"Str", "Cu"};
  f.system.table.set_epsilon(joint, Simplex{"Str"}, epsilon);
  f.system.table.set_epsilon(joint, Simplex{"Cu"}, epsilon);
  return f;
}

/// Three-mode example over {alpha, beta, gamma} hitting the four probe
/// values used in the path examples: piecewise linear in one parameter u,
/// with breakpoints at u = 0, 1, 2, 3.
inline std::pair<std::shared_ptr<const Complex>, std::shared_ptr<const PartitionOfUnity>>
triangle_partition() {
  auto complex = std::make_shared<const Complex>(
      make_complex(VertexSet({"alpha", "beta", "gamma"}), {Simplex{"alpha", "beta", "gamma"}}));
  // u=0 -> (1/2, 1/2, 0); u=1 -> (18/20, 1/20, 1/20);
  // u=2 -> (2/5, 2/5, 1/5); u=3 -> (1, 0, 0)
  std::vector<ComponentFn> comps;
  comps.emplace_back("u", PiecewiseLinear({{0.0, 0.5}, {1.0, 0.9}, {2.0, 0.4}, {3.0, 1.0}}));
  comps.emplace_back("u", PiecewiseLinear({{0.0, 0.5}, {1.0, 0.05}, {2.0, 0.4}, {3.0, 0.0}}));
  comps.emplace_back("u", PiecewiseLinear({{0.0, 0.0}, {1.0, 0.05}, {2.0, 0.2}, {3.0, 0.0}}));
  auto phi = std::make_shared<const PartitionOfUnity>(*complex, std::move(comps));
  return {complex, phi};
}

}  // namespace modesheaf::testing
