#pragma once

#include <atomic>
#include <cstdio>
#include <functional>
#include <thread>

#include "modesheaf/scenario.hpp"

namespace modesheaf {

enum class TraceEvent {
  None,
  TransferOK,
  TransferNotOK,
  Wait,
  Resume,
  ShieldBreach,
  Finished,
};

inline const char* trace_event_name(TraceEvent e) {
  switch (e) {
    case TraceEvent::None: return "None";
    case TraceEvent::TransferOK: return "TransferOK";
    case TraceEvent::TransferNotOK: return "TransferNotOK";
    case TraceEvent::Wait: return "Wait";
    case TraceEvent::Resume: return "Resume";
    case TraceEvent::ShieldBreach: return "ShieldBreach";
    case TraceEvent::Finished: return "Finished";
  }
  return "?";
}

struct TraceRow {
  long step = 0;
  double time_s = 0.0;
  std::string active_mode;
  std::vector<double> coords;
  std::vector<double> weights;
  TraceEvent event = TraceEvent::None;
};

/// Timestamped record of a run: active mode, state coordinates, the
/// barycentric weights in vertex order, and the step's event.
struct Trace {
  std::vector<std::string> coord_names;
  std::vector<std::string> weight_names;  // vertex labels, VertexSet order
  std::vector<TraceRow> rows;

  void write_csv(std::ostream& os) const {
    os << "step,time_s,active_mode";
    for (const auto& c : coord_names) os << "," << c;
    for (const auto& w : weight_names) os << ",w_" << w;
    os << ",event\n";
    char buf[32];
    auto num = [&](double v) {
      std::snprintf(buf, sizeof(buf), "%.12g", v);
      os << buf;
    };
    for (const auto& r : rows) {
      os << r.step << ",";
      num(r.time_s);
      os << "," << r.active_mode;
      for (double c : r.coords) {
        os << ",";
        num(c);
      }
      for (double w : r.weights) {
        os << ",";
        num(w);
      }
      os << "," << trace_event_name(r.event) << "\n";
    }
  }
};

// --- per-mode control algorithms -------------------------------------------

class SimulationEngine;

/// Facilities a mode's control algorithm may use: its local state, the
/// oracles, the local calibration, the zone status and the transfer
/// dispatcher. The engine never initiates transfers on its own; the
/// algorithm has the final say.
class CarContext {
 public:
  CarContext(SimulationEngine& engine, int car) : engine_(&engine), car_(car) {}

  State& state();
  const ModePackage& package() const;
  double oracle_pos();
  Check oracle_power(double v);
  /// Component of the local evaluator at the current state.
  double phi_component(const Label& l);
  Zone zone();
  std::vector<Simplex> admissible_transfers();
  TransitionOutcome request_transfer(const Simplex& target);
  void halt();

 private:
  SimulationEngine* engine_;
  int car_;
};

struct CarAlgorithm {
  std::function<void(CarContext&)> on_enter;
  std::function<void(CarContext&)> on_step;
};

/// Built-in algorithms, bound by name from scenario files.
inline const std::map<std::string, CarAlgorithm>& algorithm_registry();

// --- run results -------------------------------------------------------------

struct RunConfig {
  std::optional<double> dt_override;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::vector<double>> offsets_frac_override;
  bool keep_trace = true;
  double max_sim_time_s = 3600.0;
};

struct RunResult {
  int exit_code = 0;  // 0 finished, 2 shield breach, 3 unrecovered halt
  bool finished = false;
  bool breach = false;
  bool halted = false;
  long steps = 0;
  std::vector<std::string> mode_sequence;  // deduped active-mode keys
  std::set<Label> visited_vertices;        // vertices of every active mode
  std::vector<std::pair<int, double>> wait_events;    // (car, time_s)
  std::vector<std::pair<int, double>> resume_events;  // (car, time_s)
  Trace trace;
};

// --- engine ------------------------------------------------------------------

class SimulationEngine {
 public:
  explicit SimulationEngine(const Scenario& scenario, const RunConfig& config = {})
      : sc_(&scenario), cfg_(config), env_(scenario.env.make()) {
    dt_ = cfg_.dt_override.value_or(scenario.env.dt_s);
    if (dt_ <= 0.0) fail(ErrorCode::SchemaError, "dt must be positive");
    if (cfg_.seed_override) {
      EnvironmentConfig ec = scenario.env;
      ec.seed = *cfg_.seed_override;
      env_ = ec.make();
    }
    std::vector<double> offsets =
        cfg_.offsets_frac_override.value_or(scenario.start_offsets_frac);
    offsets.resize(static_cast<std::size_t>(env_.cars()), 0.0);
    for (int i = 0; i < env_.cars(); ++i)
      env_.set_position(i, offsets[static_cast<std::size_t>(i)] * env_.length_km());

    for (int i = 0; i < env_.cars(); ++i) {
      CarRun run;
      run.mode = parse_mode_key(scenario.car.initial_mode_key);
      cars_.push_back(std::move(run));
      bind_algorithm(i);
    }

    if (scenario.joint) {
      joint_state_ = joint_state();
      BarycentricPoint p = scenario.joint->phi->evaluate(*joint_state_);
      tracker_.emplace(*scenario.joint->complex, scenario.joint->table, p.support());
      if (scenario.joint->wait)
        wait_regions_ = derive_wait_regions(scenario.env, *scenario.joint->wait);
    }

    result_.trace.coord_names = coord_names();
    result_.trace.weight_names = active_complex().vertices().labels();
    note_mode(active_mode_key(), active_mode());
  }

  RunResult run() {
    const long max_steps = static_cast<long>(cfg_.max_sim_time_s / dt_) + 1;
    for (long step = 0; step < max_steps; ++step) {
      step_events_.clear();
      update_finished();
      if (all_finished()) {
        result_.finished = true;
        push_event(TraceEvent::Finished);
        log_row(step);
        break;
      }
      if (all_stopped()) {
        result_.halted = true;
        log_row(step);
        break;
      }

      for (int i = 0; i < env_.cars(); ++i) {
        CarRun& car = cars_[static_cast<std::size_t>(i)];
        if (car.finished || car.halted) continue;
        CarContext ctx(*this, i);
        if (!car.entered) {
          car.entered = true;
          if (car.algo->on_enter)
            car.algo->on_enter(ctx);
          else if (car.algo->on_step)
            car.algo->on_step(ctx);
        } else if (car.algo->on_step) {
          car.algo->on_step(ctx);
        }
      }

      if (!wait_regions_.empty()) run_guard();

      if (tracker_) {
        joint_state_ = joint_state();
        joint_point_ = sc_->joint->phi->evaluate(*joint_state_);
        for (const auto& m : tracker_->feed(*joint_point_)) note_mode(mode_key(m), m);
      } else {
        note_mode(active_mode_key(), active_mode());
      }

      log_row(step);
      if (breach_) break;
      env_.advance(dt_);
    }

    if (breach_) {
      result_.breach = true;
      result_.exit_code = 2;
    } else if (result_.finished) {
      result_.exit_code = 0;
    } else {
      result_.halted = true;
      result_.exit_code = 3;
    }
    result_.steps = env_.step();
    return std::move(result_);
  }

 private:
  friend class CarContext;

  struct CarRun {
    Simplex mode;
    State state;
    const CarAlgorithm* algo = nullptr;
    bool entered = false;
    bool halted = false;
    bool finished = false;
    // chicane bookkeeping
    bool timer_override = false;
    std::optional<double> min_resume_time;
  };

  void bind_algorithm(int i) {
    CarRun& car = cars_[static_cast<std::size_t>(i)];
    const ModePackage& pkg = sc_->car.system.package(car.mode);
    auto it = algorithm_registry().find(pkg.algorithm);
    if (it == algorithm_registry().end())
      fail(ErrorCode::SchemaError, "unknown algorithm '" + pkg.algorithm + "'");
    car.algo = &it->second;
  }

  const Complex& active_complex() const {
    return sc_->joint ? *sc_->joint->complex : *sc_->car.complex;
  }

  std::vector<std::string> coord_names() const {
    if (env_.cars() == 1) return {"v", "x"};
    return {"v1", "x1", "v2", "x2"};
  }

  State joint_state() const {
    State s;
    for (int i = 0; i < env_.cars(); ++i)
      s.set("x" + std::to_string(i + 1), env_.position_km(i));
    return s;
  }

  Simplex active_mode() const {
    return tracker_ ? tracker_->mode() : cars_[0].mode;
  }

  std::string active_mode_key() const { return mode_key(active_mode()); }

  void note_mode(const std::string& key, const Simplex& mode) {
    if (result_.mode_sequence.empty() || result_.mode_sequence.back() != key)
      result_.mode_sequence.push_back(key);
    for (const auto& l : mode.members()) result_.visited_vertices.insert(l);
  }

  void push_event(TraceEvent e) { step_events_.push_back(e); }

  TraceEvent step_event() const {
    static constexpr TraceEvent priority[] = {
        TraceEvent::ShieldBreach, TraceEvent::TransferNotOK, TraceEvent::Wait,
        TraceEvent::Resume,       TraceEvent::TransferOK,    TraceEvent::Finished,
    };
    for (TraceEvent p : priority)
      for (TraceEvent e : step_events_)
        if (e == p) return e;
    return TraceEvent::None;
  }

  void update_finished() {
    for (int i = 0; i < env_.cars(); ++i) {
      CarRun& car = cars_[static_cast<std::size_t>(i)];
      if (!car.finished && env_.position_km(i) >= env_.length_km()) car.finished = true;
    }
  }

  bool all_finished() const {
    for (const auto& c : cars_)
      if (!c.finished) return false;
    return true;
  }

  bool all_stopped() const {
    for (const auto& c : cars_)
      if (!c.finished && !c.halted) return false;
    return true;
  }

  bool in_wait_region(int i) const {
    const WaitRegion& r = wait_regions_[static_cast<std::size_t>(i)];
    double self = env_.position_km(i);
    double other = env_.position_km(1 - i);
    return r.self.contains(self) && r.other.contains(other);
  }

  /// Chicane shield. A car halts while inside its wait region. When both
  /// halt, staggered timers resolve the deadlock: the second car restarts
  /// first (override active until its region clears); the first car still
  /// waits for its region to clear and at least its own timer.
  void run_guard() {
    const WaitConfig& wait = *sc_->joint->wait;
    bool now0 = in_wait_region(0);
    bool now1 = in_wait_region(1);

    auto want_wait = [&](int i, bool now) {
      CarRun& car = cars_[static_cast<std::size_t>(i)];
      if (!now) {
        car.timer_override = false;
        if (env_.waiting(i)) {
          if (car.min_resume_time && env_.clock_s() < *car.min_resume_time) return;
          env_.set_waiting(i, false);
          car.min_resume_time.reset();
          push_event(TraceEvent::Resume);
          result_.resume_events.emplace_back(i, env_.clock_s());
        }
        return;
      }
      if (car.timer_override) return;
      if (!env_.waiting(i)) {
        env_.set_waiting(i, true);
        push_event(TraceEvent::Wait);
        result_.wait_events.emplace_back(i, env_.clock_s());
      }
    };

    want_wait(0, now0);
    want_wait(1, now1);

    if (env_.waiting(0) && env_.waiting(1) && !deadlock_since_) {
      deadlock_since_ = env_.clock_s();
      cars_[0].min_resume_time = *deadlock_since_ + wait.timer1_s;
    }
    if (deadlock_since_ && env_.waiting(1) &&
        env_.clock_s() >= *deadlock_since_ + wait.timer2_s) {
      env_.set_waiting(1, false);
      cars_[1].timer_override = true;
      push_event(TraceEvent::Resume);
      result_.resume_events.emplace_back(1, env_.clock_s());
    }

    // shield failure: both cars strictly inside the chicane
    if (env_.chicane_km()) {
      auto [lo, hi] = *env_.chicane_km();
      bool b0 = env_.position_km(0) > lo && env_.position_km(0) < hi;
      bool b1 = env_.position_km(1) > lo && env_.position_km(1) < hi;
      if (b0 && b1) {
        breach_ = true;
        push_event(TraceEvent::ShieldBreach);
      }
    }
  }

  void log_row(long step) {
    TraceRow row;
    row.step = step;
    row.time_s = env_.clock_s();
    row.active_mode = active_mode_key();
    if (env_.cars() == 1) {
      row.coords = {env_.speed_setting(0), env_.position_km(0)};
      State s{{"v", env_.speed_setting(0)}, {"x", env_.position_km(0)}};
      row.weights = sc_->car.phi->evaluate(s).weights();
    } else {
      row.coords = {env_.speed_setting(0), env_.position_km(0), env_.speed_setting(1),
                    env_.position_km(1)};
      if (!joint_point_) joint_point_ = sc_->joint->phi->evaluate(joint_state());
      row.weights = joint_point_->weights();
    }
    row.event = step_event();
    if (cfg_.keep_trace) result_.trace.rows.push_back(std::move(row));
  }

  const Scenario* sc_;
  RunConfig cfg_;
  TrackEnvironment env_;
  double dt_ = 0.01;
  std::vector<CarRun> cars_;
  std::optional<ModeTracker> tracker_;
  std::optional<State> joint_state_;
  std::optional<BarycentricPoint> joint_point_;
  std::vector<WaitRegion> wait_regions_;
  std::optional<double> deadlock_since_;
  bool breach_ = false;
  std::vector<TraceEvent> step_events_;
  RunResult result_;
};

// --- CarContext methods -------------------------------------------------

inline State& CarContext::state() {
  return engine_->cars_[static_cast<std::size_t>(car_)].state;
}

inline const ModePackage& CarContext::package() const {
  return engine_->sc_->car.system.package(
      engine_->cars_[static_cast<std::size_t>(car_)].mode);
}

inline double CarContext::oracle_pos() { return engine_->env_.oracle_pos(car_); }

inline Check CarContext::oracle_power(double v) {
  return engine_->env_.oracle_power(car_, v);
}

inline double CarContext::phi_component(const Label& l) {
  return package().phi->evaluate(state()).weight(l);
}

inline Zone CarContext::zone() { return comfort_zone_status(package(), state()); }

inline std::vector<Simplex> CarContext::admissible_transfers() {
  return admissible_targets(engine_->sc_->car.system,
                            engine_->cars_[static_cast<std::size_t>(car_)].mode, state());
}

inline TransitionOutcome CarContext::request_transfer(const Simplex& target) {
  auto& car = engine_->cars_[static_cast<std::size_t>(car_)];
  TransitionOutcome out = tran(engine_->sc_->car.system, car.mode, car.state, target);
  if (out.ok() && out.reason != TransitionOutcome::Reason::Identity) {
    car.mode = *out.new_mode;
    car.state = *out.new_state;
    car.entered = false;  // next step runs the new mode's entry actions
    engine_->bind_algorithm(car_);
    engine_->push_event(TraceEvent::TransferOK);
    if (!engine_->tracker_)
      engine_->note_mode(mode_key(car.mode), car.mode);
  } else if (!out.ok()) {
    engine_->push_event(TraceEvent::TransferNotOK);
  }
  return out;
}

inline void CarContext::halt() {
  engine_->cars_[static_cast<std::size_t>(car_)].halted = true;
}

// --- built-in algorithms ------------------------------------------------

inline const std::map<std::string, CarAlgorithm>& algorithm_registry() {
  static const std::map<std::string, CarAlgorithm> registry = [] {
    std::map<std::string, CarAlgorithm> reg;

    // Straight: run at top speed; ask to widen the mode as soon as the
    // straight's own belief drops below 9/10. A refused transfer stops
    // the car.
    reg["full_throttle"] = CarAlgorithm{
        [](CarContext& ctx) {
          ctx.state() = State{{"v", 0.0}, {"x", 0.0}};
          ctx.state().set("x", ctx.oracle_pos());
          ctx.oracle_power(120.0);
          ctx.state().set("v", 120.0);
        },
        [](CarContext& ctx) {
          ctx.state().set("x", ctx.oracle_pos());
          if (ctx.phi_component("Str") < 0.9) {
            TransitionOutcome out =
                ctx.request_transfer(ctx.package().mode.unite(Simplex{"Cu"}));
            if (!out.ok()) {
              ctx.oracle_power(0.0);
              ctx.state().set("v", 0.0);
              ctx.halt();
            }
          }
        }};

    // Joint mode: blend the speed from 120 down to 80 as the curve's
    // weight t grows; hand over to the curve mode when t reaches 1.
    reg["blend_slowdown"] = CarAlgorithm{
        nullptr,
        [](CarContext& ctx) {
          ctx.state().set("x", ctx.oracle_pos());
          double t = ctx.phi_component("Cu");
          double v = 80.0 * t + 120.0 * (1.0 - t);
          ctx.oracle_power(v);
          ctx.state().set("v", v);
          if (t >= 1.0) {
            TransitionOutcome out = ctx.request_transfer(Simplex{"Cu"});
            if (!out.ok()) {
              ctx.oracle_power(0.0);
              ctx.state().set("v", 0.0);
              ctx.halt();
            }
          }
        }};

    // Curve: hold 80 to the finish; no further transfers.
    reg["curve_hold"] = CarAlgorithm{
        [](CarContext& ctx) {
          ctx.oracle_power(80.0);
          ctx.state().set("v", 80.0);
        },
        [](CarContext& ctx) { ctx.state().set("x", ctx.oracle_pos()); }};

    return reg;
  }();
  return registry;
}

// --- convenience entry points ---------------------------------------------

inline RunResult run_scenario(const Scenario& sc, const RunConfig& cfg = {}) {
  SimulationEngine engine(sc, cfg);
  return engine.run();
}

struct SweepResult {
  std::vector<std::vector<RunResult>> runs;  // [i][j] for offsets (i, j)
  int worst_exit = 0;
};

/// Grid sweep of start offsets over [0, max_frac * L] per car, run as
/// independent concurrent simulations.
inline SweepResult run_sweep(const Scenario& sc, int n_per_axis, double max_frac,
                             RunConfig cfg = {}) {
  if (sc.env.cars != 2) fail(ErrorCode::SchemaError, "sweep requires a two-car scenario");
  if (n_per_axis < 2) fail(ErrorCode::SchemaError, "sweep needs at least 2 points per axis");
  cfg.keep_trace = false;

  SweepResult sweep;
  sweep.runs.resize(static_cast<std::size_t>(n_per_axis));
  for (auto& row : sweep.runs) row.resize(static_cast<std::size_t>(n_per_axis));

  std::atomic<int> next{0};
  const int total = n_per_axis * n_per_axis;
  auto worker = [&] {
    for (;;) {
      int k = next.fetch_add(1);
      if (k >= total) return;
      int i = k / n_per_axis;
      int j = k % n_per_axis;
      RunConfig rc = cfg;
      rc.offsets_frac_override = std::vector<double>{
          max_frac * i / (n_per_axis - 1), max_frac * j / (n_per_axis - 1)};
      sweep.runs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          run_scenario(sc, rc);
    }
  };

  unsigned n_threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (const auto& row : sweep.runs)
    for (const auto& r : row) sweep.worst_exit = std::max(sweep.worst_exit, r.exit_code);
  return sweep;
}

/// Axiom validation performed before a run: the partition axioms on
/// seeded probes from every mode's state space, and on a grid of joint
/// states when a joint model is present.
inline PartitionAxiomReport validate_scenario(const Scenario& sc,
                                              std::size_t probes_per_mode = 200) {
  std::mt19937_64 rng(20240913);
  std::vector<State> probes;
  for (const auto& [key, pkg] : sc.car.system.packages) {
    for (std::size_t k = 0; k < probes_per_mode; ++k)
      probes.push_back(pkg.state_space.sample(rng));
  }
  PartitionAxiomReport report = validate_partition(*sc.car.phi, probes);

  if (sc.joint) {
    std::vector<State> joint_probes;
    const double L = sc.env.length_km;
    const int n = 41;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        joint_probes.push_back(
            State{{"x1", L * i / (n - 1)}, {"x2", L * j / (n - 1)}});
      }
    }
    PartitionAxiomReport joint_report = validate_partition(*sc.joint->phi, joint_probes);
    report.probes_checked += joint_report.probes_checked;
    for (auto& v : joint_report.violations) report.violations.push_back(std::move(v));
  }
  return report;
}

}  // namespace modesheaf
