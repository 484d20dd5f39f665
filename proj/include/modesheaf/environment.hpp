#pragma once

#include "modesheaf/core.hpp"

#include "json.hpp"

namespace modesheaf {

/// The paper-style check type for oracle calls: success or a problem,
/// with no further detail.
enum class Check { OK, NotOK };

struct FaultSpec {
  long step = 0;
  std::string oracle;  // "power" | "pos"
  int car = 0;
};

struct NoiseSpec {
  double position_amplitude_km = 0.0;
};

/// A race track of length L with one or two cars driven by power
/// settings. Positions only ever increase; speed settings live in
/// [0, 120] km/h. The environment is mutated by oracle_power and advance
/// only; position reads are effect-free.
class TrackEnvironment {
 public:
  TrackEnvironment() : TrackEnvironment(8.0, 1) {}
  TrackEnvironment(double length_km, int cars, std::uint64_t seed = 0)
      : length_km_(length_km),
        positions_(static_cast<std::size_t>(cars), 0.0),
        settings_(static_cast<std::size_t>(cars), 0.0),
        waiting_(static_cast<std::size_t>(cars), false),
        rng_(seed),
        seed_(seed) {
    if (cars < 1) fail(ErrorCode::SchemaError, "need at least one car");
    if (length_km <= 0.0) fail(ErrorCode::SchemaError, "track length must be positive");
  }

  double length_km() const { return length_km_; }
  int cars() const { return static_cast<int>(positions_.size()); }
  double clock_s() const { return clock_s_; }
  long step() const { return step_; }

  double position_km(int car) const { return positions_.at(index(car)); }
  double speed_setting(int car) const { return settings_.at(index(car)); }
  bool waiting(int car) const { return waiting_.at(index(car)); }

  void set_position(int car, double x) { positions_.at(index(car)) = x; }
  void set_waiting(int car, bool w) { waiting_.at(index(car)) = w; }

  void set_chicane(std::optional<std::pair<double, double>> interval_km) {
    chicane_km_ = interval_km;
  }
  const std::optional<std::pair<double, double>>& chicane_km() const {
    return chicane_km_;
  }

  void set_noise(NoiseSpec noise) { noise_ = noise; }
  void set_faults(std::vector<FaultSpec> faults) { faults_ = std::move(faults); }

  /// Measured position of a car. With noise configured the reading is
  /// perturbed by a seeded draw; the environment state is unchanged.
  double oracle_pos(int car) {
    double x = positions_.at(index(car));
    if (noise_.position_amplitude_km > 0.0) {
      std::uniform_real_distribution<double> d(-noise_.position_amplitude_km,
                                               noise_.position_amplitude_km);
      x = std::clamp(x + d(rng_), 0.0, length_km_);
    }
    return x;
  }

  /// Set the car's power controller to speed v. Returns NotOK, with no
  /// state change, for v outside [0, 120] or when a fault is scheduled
  /// for this step.
  Check oracle_power(int car, double v) {
    if (v < 0.0 || v > 120.0) return Check::NotOK;
    for (const auto& f : faults_) {
      if (f.step == step_ && f.car == car && f.oracle == "power") return Check::NotOK;
    }
    settings_.at(index(car)) = v;
    return Check::OK;
  }

  /// Advance time by dt: every non-waiting car moves by its setting,
  /// clamped at the finish line.
  void advance(double dt_s) {
    if (dt_s <= 0.0) fail(ErrorCode::SchemaError, "dt must be positive");
    for (std::size_t i = 0; i < positions_.size(); ++i) {
      if (waiting_[i]) continue;
      positions_[i] =
          std::min(length_km_, positions_[i] + settings_[i] * dt_s / 3600.0);
    }
    clock_s_ += dt_s;
    ++step_;
  }

  /// Value-semantics variant of advance.
  TrackEnvironment advanced(double dt_s) const {
    TrackEnvironment next = *this;
    next.advance(dt_s);
    return next;
  }

 private:
  std::size_t index(int car) const {
    if (car < 0 || car >= cars())
      fail(ErrorCode::SchemaError, "car index " + std::to_string(car) + " out of range");
    return static_cast<std::size_t>(car);
  }

  double length_km_;
  double clock_s_ = 0.0;
  long step_ = 0;
  std::vector<double> positions_;
  std::vector<double> settings_;
  std::vector<bool> waiting_;
  std::optional<std::pair<double, double>> chicane_km_;
  NoiseSpec noise_;
  std::vector<FaultSpec> faults_;
  std::mt19937_64 rng_;
  std::uint64_t seed_;
};

struct EnvironmentConfig {
  double length_km = 8.0;
  double dt_s = 0.01;
  int cars = 1;
  std::optional<std::pair<double, double>> chicane_frac;  // fractions of L
  NoiseSpec noise;
  std::vector<FaultSpec> faults;
  std::uint64_t seed = 0;

  TrackEnvironment make() const {
    TrackEnvironment env(length_km, cars, seed);
    if (chicane_frac)
      env.set_chicane(std::make_pair(chicane_frac->first * length_km,
                                     chicane_frac->second * length_km));
    env.set_noise(noise);
    env.set_faults(faults);
    return env;
  }
};

// Environment block:
// { "L_km": 8.0, "dt_s": 0.01, "cars": 1, "chicane": [0.2, 0.3] | null,
//   "noise": {"position_amplitude_km": 0}, "faults": [{"step":k,"oracle":"power","car":0}],
//   "seed": 0 }
inline EnvironmentConfig environment_from_json(const nlohmann::json& j) {
  EnvironmentConfig cfg;
  cfg.length_km = j.value("L_km", 8.0);
  cfg.dt_s = j.value("dt_s", 0.01);
  cfg.cars = j.value("cars", 1);
  if (j.contains("chicane") && !j.at("chicane").is_null()) {
    const auto& c = j.at("chicane");
    if (!c.is_array() || c.size() != 2)
      fail(ErrorCode::SchemaError, "'chicane' must be [lo_frac, hi_frac]");
    cfg.chicane_frac = std::make_pair(c[0].get<double>(), c[1].get<double>());
    if (!(0.0 < cfg.chicane_frac->first && cfg.chicane_frac->first < cfg.chicane_frac->second &&
          cfg.chicane_frac->second < 0.5))
      fail(ErrorCode::SchemaError, "chicane interval must satisfy 0 < lo < hi < 1/2");
  }
  if (j.contains("noise"))
    cfg.noise.position_amplitude_km = j.at("noise").value("position_amplitude_km", 0.0);
  if (j.contains("faults")) {
    for (const auto& fj : j.at("faults")) {
      FaultSpec f;
      f.step = fj.value("step", 0L);
      f.oracle = fj.value("oracle", "power");
      f.car = fj.value("car", 0);
      cfg.faults.push_back(f);
    }
  }
  cfg.seed = j.value("seed", 0ULL);
  return cfg;
}

}  // namespace modesheaf
