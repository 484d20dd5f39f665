#pragma once

#include <fstream>
#include <memory>

#include "modesheaf/environment.hpp"
#include "modesheaf/laws.hpp"

namespace modesheaf {

/// Chicane wait geometry for one car: the car halts while its own
/// position is in `self` and the other car's position is in `other`.
struct WaitRegion {
  Interval self;
  Interval other;
};

struct WaitConfig {
  double d_frac = 0.05;     // shield depth as a fraction of L
  double timer1_s = 1.0;    // deadlock release timer, car 1 (must exceed timer2)
  double timer2_s = 0.4;    // deadlock release timer, car 2
  std::vector<WaitRegion> regions;  // per car; derived from the chicane if empty
};

struct CarModel {
  std::shared_ptr<const Complex> complex;
  std::shared_ptr<const PartitionOfUnity> phi;
  ModeSystem system;
  std::string initial_mode_key;
};

struct JointModel {
  std::shared_ptr<const Complex> complex;
  std::shared_ptr<const PartitionOfUnity> phi;
  TransitionTable table;  // eta and snap for the joint mode tracker
  std::optional<WaitConfig> wait;
};

struct Scenario {
  std::string name;
  EnvironmentConfig env;
  CarModel car;
  std::optional<JointModel> joint;
  std::vector<double> start_offsets_frac;
};

inline StateMap state_map_from_json(const nlohmann::json& j) {
  std::vector<StateMap::Assign> assigns;
  if (j.contains("assign")) {
    for (auto it = j.at("assign").begin(); it != j.at("assign").end(); ++it) {
      StateMap::Assign a;
      a.target = it.key();
      const auto& spec = it.value();
      if (spec.contains("value")) {
        a.value = spec.at("value").get<double>();
      } else {
        if (spec.contains("from")) a.from = spec.at("from").get<std::string>();
        a.scale = spec.value("scale", 1.0);
        a.offset = spec.value("offset", 0.0);
      }
      assigns.push_back(std::move(a));
    }
  }
  return StateMap(std::move(assigns));
}

namespace detail {

inline std::pair<Simplex, Simplex> parse_pair_key(const std::string& key) {
  auto arrow = key.find("->");
  if (arrow == std::string::npos)
    fail(ErrorCode::SchemaError, "transition key '" + key + "' must be 'From->To'");
  return {parse_mode_key(key.substr(0, arrow)), parse_mode_key(key.substr(arrow + 2))};
}

}  // namespace detail

/// Parse the per-car model block: complex, partition, mode packages,
/// thresholds and transition maps.
inline CarModel car_model_from_json(const nlohmann::json& j) {
  CarModel model;
  model.complex = std::make_shared<const Complex>(complex_from_json(j.at("complex")));

  double snap = kSnapTolerance;
  if (j.contains("thresholds")) snap = j.at("thresholds").value("snap", kSnapTolerance);
  model.phi = std::make_shared<const PartitionOfUnity>(
      partition_from_json(*model.complex, j.at("partition"), snap));

  model.system.complex = model.complex.get();
  model.system.table.set_snap(snap);

  const auto& thresholds = j.at("thresholds");
  if (thresholds.contains("eta")) model.system.table.set_eta(thresholds.at("eta").get<double>());
  if (thresholds.contains("default_epsilon"))
    model.system.table.set_default_epsilon(thresholds.at("default_epsilon").get<double>());
  if (thresholds.contains("epsilon")) {
    for (auto it = thresholds.at("epsilon").begin(); it != thresholds.at("epsilon").end(); ++it) {
      auto [from, to] = detail::parse_pair_key(it.key());
      model.system.table.set_epsilon(from, to, it.value().get<double>());
    }
  }

  if (!j.contains("modes")) fail(ErrorCode::SchemaError, "car model needs 'modes'");
  for (auto it = j.at("modes").begin(); it != j.at("modes").end(); ++it) {
    Simplex mode = parse_mode_key(it.key());
    if (!model.complex->contains(mode))
      fail(ErrorCode::SchemaError, "mode '" + it.key() + "' is not a simplex of the complex");
    ModePackage pkg;
    pkg.mode = mode;
    pkg.state_space = box_from_json(it.value().at("state_space"));
    pkg.phi = model.phi.get();
    pkg.algorithm = it.value().value("algorithm", "");
    if (thresholds.contains("kappa") && thresholds.at("kappa").contains(it.key()))
      pkg.kappa = thresholds.at("kappa").at(it.key()).get<double>();
    if (thresholds.contains("pi") && thresholds.at("pi").contains(it.key()))
      pkg.pi = thresholds.at("pi").at(it.key()).get<double>();
    pkg.validate();
    model.system.packages[it.key()] = std::move(pkg);
  }

  if (j.contains("transitions")) {
    const auto& tj = j.at("transitions");
    if (tj.contains("inc")) {
      for (auto it = tj.at("inc").begin(); it != tj.at("inc").end(); ++it) {
        auto [from, to] = detail::parse_pair_key(it.key());
        model.system.table.set_inc(from, to, state_map_from_json(it.value()));
      }
    }
    if (tj.contains("proj")) {
      for (auto it = tj.at("proj").begin(); it != tj.at("proj").end(); ++it) {
        auto [from, to] = detail::parse_pair_key(it.key());
        model.system.table.set_proj(from, to, state_map_from_json(it.value()));
      }
    }
  }

  model.initial_mode_key = j.value("initial_mode", "");
  if (model.initial_mode_key.empty())
    fail(ErrorCode::SchemaError, "car model needs 'initial_mode'");
  if (!model.system.packages.count(model.initial_mode_key))
    fail(ErrorCode::SchemaError, "initial mode has no package");
  return model;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc;
  sc.name = j.value("name", "scenario");
  sc.env = environment_from_json(j.at("environment"));
  sc.car = car_model_from_json(j.at("car"));

  if (j.contains("joint")) {
    const auto& jj = j.at("joint");
    JointModel joint;
    joint.complex = std::make_shared<const Complex>(complex_from_json(jj.at("complex")));
    joint.phi = std::make_shared<const PartitionOfUnity>(
        partition_from_json(*joint.complex, jj.at("partition"), sc.car.phi->snap()));
    joint.table.set_eta(sc.car.system.table.eta());
    joint.table.set_snap(sc.car.system.table.snap());
    if (jj.contains("wait")) {
      WaitConfig wait;
      const auto& wj = jj.at("wait");
      wait.d_frac = wj.value("d_frac", 0.05);
      wait.timer1_s = wj.value("timer1_s", 1.0);
      wait.timer2_s = wj.value("timer2_s", 0.4);
      if (wait.timer2_s >= wait.timer1_s)
        fail(ErrorCode::SchemaError, "wait timers need timer2 < timer1");
      if (wj.contains("regions")) {
        for (const auto& rj : wj.at("regions")) {
          WaitRegion r;
          r.self = Interval{rj.at("self")[0].get<double>(), rj.at("self")[1].get<double>()};
          r.other = Interval{rj.at("other")[0].get<double>(), rj.at("other")[1].get<double>()};
          wait.regions.push_back(r);
        }
      }
      joint.wait = wait;
    }
    sc.joint = std::move(joint);
  }

  if (j.contains("start_offsets_frac"))
    sc.start_offsets_frac = j.at("start_offsets_frac").get<std::vector<double>>();
  sc.start_offsets_frac.resize(static_cast<std::size_t>(sc.env.cars), 0.0);

  if (sc.env.cars > 2) fail(ErrorCode::SchemaError, "at most two cars are supported");
  if (sc.env.cars == 2 && !sc.joint)
    fail(ErrorCode::SchemaError, "two-car scenarios need a 'joint' block");
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::SchemaError, "cannot open scenario file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::SchemaError, "parse error in '" + path + "': " + e.what());
  }
  return scenario_from_json(j);
}

/// Derive the per-car wait rectangles from the chicane interval: car 1's
/// region is [lo-d, lo] x [lo-2d, hi] in (x1, x2); car 2's is the mirror
/// image. Two overlapping rectangles forming the arrowhead shield.
inline std::vector<WaitRegion> derive_wait_regions(const EnvironmentConfig& env,
                                                   const WaitConfig& wait) {
  if (!wait.regions.empty()) return wait.regions;
  if (!env.chicane_frac)
    fail(ErrorCode::SchemaError, "wait regions require a chicane interval");
  double L = env.length_km;
  double lo = env.chicane_frac->first * L;
  double hi = env.chicane_frac->second * L;
  double d = wait.d_frac * L;
  WaitRegion car1{Interval{lo - d, lo}, Interval{lo - 2 * d, hi}};
  WaitRegion car2 = car1;  // same shape with the roles of x1 and x2 swapped
  return {car1, car2};
}

}  // namespace modesheaf
